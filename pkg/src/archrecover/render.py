"""DOT output for clustered dependency graphs.

One ellipse per cluster, named by its most significant primitives. One edge
per connected cluster pair, drawn along the direction with more unique
dependencies and labelled ``N (M)``, the bracketed count being the opposite
direction (omitted when zero). Edge colour encodes the quantile bucket of
N + M.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .aib import Clustering
from .depgraph import DependencyGraph, DepEdge, MethodRef
from .significance import UseCaseAnnotation, label_cluster

LOW_COLOR = (0x45, 0x75, 0xB4)
HIGH_COLOR = (0xD7, 0x30, 0x27)


@dataclass(frozen=True)
class RenderOptions:
    label_depth: int = 3
    color_buckets: int = 3
    show_overlay: bool = False
    redact: bool = False

    def __post_init__(self):
        if self.label_depth < 1:
            raise ValueError("label_depth must be positive")
        if self.color_buckets < 1:
            raise ValueError("color_buckets must be positive")


def bucket_colors(n: int) -> list[str]:
    """``n`` hex colours from cool (rare) to warm (frequent)."""
    out = []
    for b in range(n):
        t = b / (n - 1) if n > 1 else 1.0
        rgb = [round(lo + (hi - lo) * t) for lo, hi in zip(LOW_COLOR, HIGH_COLOR)]
        out.append("#%02x%02x%02x" % tuple(rgb))
    return out


def quantile_buckets(totals: Sequence[int], n_buckets: int) -> list[int]:
    """Bucket index in 0..n_buckets-1 for each total, split at the empirical quantiles."""
    if not totals:
        return []
    cuts = np.quantile(np.asarray(totals, dtype=float),
                       [b / n_buckets for b in range(1, n_buckets)]).tolist()
    return [bisect.bisect_left(cuts, t) for t in totals]


def redact_graph(graph: DependencyGraph, clustering: Clustering):
    """Replace component and method names with stable ids ``p<i>`` / ``m<i>`` (sorted order)."""
    comps = sorted(set(graph.components) | set(clustering.partition))
    cmap = {c: f"p{i}" for i, c in enumerate(comps)}
    methods = sorted({e.src.method for e in graph.edges} | {e.dst.method for e in graph.edges})
    mmap = {m: f"m{i}" for i, m in enumerate(methods)}
    edges = frozenset(
        DepEdge(MethodRef(cmap[e.src.component], mmap[e.src.method]),
                MethodRef(cmap[e.dst.component], mmap[e.dst.method]), e.kind, e.first_seen)
        for e in graph.edges)
    g = DependencyGraph(frozenset(cmap[c] for c in graph.components), edges)
    c = Clustering({cmap[o]: k for o, k in clustering.partition.items()})
    return g, c, cmap


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _html_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _overlay_color(intensity: float) -> str:
    # black for untouched, ramping to saturated red
    r = round(0xD7 * intensity)
    return "#%02x%02x%02x" % (r, 0, 0)


def inter_cluster_counts(clustering: Clustering, graph: DependencyGraph) -> dict[tuple[int, int], int]:
    part = clustering.partition
    counts: dict[tuple[int, int], int] = {}
    for (a, b), n in graph.component_pairs().items():
        if a in part and b in part and part[a] != part[b]:
            key = (part[a], part[b])
            counts[key] = counts.get(key, 0) + n
    return counts


def to_dot(clustering: Clustering, graph: DependencyGraph, options: RenderOptions = RenderOptions(),
           annotations: Optional[Sequence[UseCaseAnnotation]] = None) -> str:
    if options.redact:
        graph, clustering, cmap = redact_graph(graph, clustering)
        if annotations is not None:
            annotations = [UseCaseAnnotation(cmap[a.primitive], a.use_cases, a.intensity)
                           for a in annotations if a.primitive in cmap]
    groups = clustering.clusters()
    labels = [label_cluster(g, clustering, graph, options.label_depth) for g in groups]
    # node ids follow label order; clusters are labelled by their top primitives
    order = sorted(range(len(groups)), key=lambda k: (labels[k], groups[k]))
    node_id = {k: f"n{i}" for i, k in enumerate(order)}

    lines = ["digraph architecture {", "  node [shape=ellipse];"]
    intensity = {a.primitive: a.intensity for a in annotations or ()}
    for k in order:
        if options.show_overlay and annotations is not None:
            shown = labels[k].split(", ")
            parts = ['<font color="%s">%s</font>' % (_overlay_color(intensity.get(p, 0.0)), _html_escape(p))
                     for p in shown]
            lines.append(f"  {node_id[k]} [label=<{', '.join(parts)}>];")
        else:
            lines.append(f"  {node_id[k]} [label={_quote(labels[k])}];")

    counts = inter_cluster_counts(clustering, graph)
    drawn = []
    for a, b in {tuple(sorted(p)) for p in counts}:
        ab, ba = counts.get((a, b), 0), counts.get((b, a), 0)
        if ab > ba or (ab == ba and (labels[a], groups[a]) < (labels[b], groups[b])):
            src, dst, n, m = a, b, ab, ba
        else:
            src, dst, n, m = b, a, ba, ab
        drawn.append((node_id[src], node_id[dst], n, m))
    drawn.sort(key=lambda t: (int(t[0][1:]), int(t[1][1:])))
    colors = bucket_colors(options.color_buckets)
    buckets = quantile_buckets([n + m for _, _, n, m in drawn], options.color_buckets)
    for (s, d, n, m), b in zip(drawn, buckets):
        label = f"{n} ({m})" if m else f"{n}"
        lines.append(f'  {s} -> {d} [label="{label}", color="{colors[b]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

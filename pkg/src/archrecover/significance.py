"""Ranking primitives inside clusters, cluster naming, and use-case overlays."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .aib import Clustering
from .depgraph import DependencyGraph, build_graph
from .errors import UnknownPrimitive
from .trace import SymbolTable, TraceRecord


@dataclass(frozen=True)
class SignificanceScore:
    primitive: str
    ext: int
    out_own: int
    in_own: int

    @property
    def score(self) -> float:
        return self.ext * (self.out_own + 1) / (self.in_own + 1)


@dataclass(frozen=True)
class UseCaseAnnotation:
    primitive: str
    use_cases: frozenset[str]
    intensity: float

    def to_line(self) -> str:
        return f"O {self.primitive} {self.intensity:.4f} {','.join(sorted(self.use_cases))}".rstrip()


def significance(primitive: str, clustering: Clustering, graph: DependencyGraph) -> SignificanceScore:
    """Count external edges and own-cluster fan-out/fan-in for one primitive.

    Components of ``graph`` that the clustering does not cover count as
    outside every cluster.
    """
    part = clustering.partition
    if primitive not in part:
        raise UnknownPrimitive(primitive)
    own = part[primitive]
    ext = out_own = in_own = 0
    for e in graph.edges:
        s, d = e.src.component, e.dst.component
        if s == primitive:
            other, outgoing = d, True
        elif d == primitive:
            other, outgoing = s, False
        else:
            continue
        if part.get(other) == own:
            if outgoing:
                out_own += 1
            else:
                in_own += 1
        else:
            ext += 1
    return SignificanceScore(primitive, ext, out_own, in_own)


def rank_primitives(cluster: Iterable[str], clustering: Clustering,
                    graph: DependencyGraph) -> list[SignificanceScore]:
    scores = [significance(p, clustering, graph) for p in cluster]
    return sorted(scores, key=lambda s: (-s.score, s.primitive))


def label_cluster(cluster: Iterable[str], clustering: Clustering, graph: DependencyGraph,
                  j: int) -> str:
    cluster = list(cluster)
    if not cluster:
        raise ValueError("cannot label an empty cluster")
    if j < 1:
        raise ValueError("label depth must be positive")
    ranked = rank_primitives(cluster, clustering, graph)
    return ", ".join(s.primitive for s in ranked[:j])


def _touches(records: Sequence[TraceRecord], primitive: str) -> bool:
    return any(r.src_module == primitive or r.dst_module == primitive for r in records)


def overlay(clustering: Clustering, graph: DependencyGraph,
            usecases: Mapping[str, Sequence[TraceRecord]],
            tables: Optional[Mapping[str, SymbolTable]] = None) -> list[UseCaseAnnotation]:
    """Annotate each primitive with the use cases that exercise it.

    Intensity is a smoothed significance, (ext + 1)(out_own + 1)/(in_own + 1),
    evaluated on the dependency graph of the primitive's own use-case traces
    and scaled so the strongest primitive is 1. Primitives no trace touches
    get intensity 0.

    ``graph`` is accepted for interface symmetry with the rest of the
    pipeline; edges are rebuilt from the use-case traces themselves.
    """
    raw: dict[str, float] = {}
    names: dict[str, frozenset[str]] = {}
    # one graph per distinct set of use cases
    cache: dict[frozenset[str], DependencyGraph] = {}
    for p in sorted(clustering.partition):
        hits = frozenset(n for n, recs in usecases.items() if _touches(recs, p))
        names[p] = hits
        if not hits:
            raw[p] = 0.0
            continue
        if hits not in cache:
            recs = [r for n in sorted(hits) for r in usecases[n]]
            cache[hits] = build_graph(recs, tables)
        s = significance(p, clustering, cache[hits])
        raw[p] = (s.ext + 1) * (s.out_own + 1) / (s.in_own + 1)
    top = max(raw.values(), default=0.0)
    return [UseCaseAnnotation(p, names[p], raw[p] / top if top > 0 else 0.0)
            for p in sorted(clustering.partition)]

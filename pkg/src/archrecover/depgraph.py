"""Inter-component dependency graph built from traces and import tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, TextIO

from .errors import MalformedGraph
from .trace import SymbolTable, TraceRecord, site_label

IMPORT_SITE = "<import>"


class EdgeKind(str, Enum):
    DYNAMIC = "dynamic"
    STATIC_IMPORT = "static-import"


@dataclass(frozen=True, order=True)
class MethodRef:
    component: str
    method: str

    def __post_init__(self):
        if not self.component or not self.method:
            raise ValueError("MethodRef fields must be nonempty")


@dataclass(frozen=True)
class DepEdge:
    src: MethodRef
    dst: MethodRef
    kind: EdgeKind = EdgeKind.DYNAMIC
    first_seen: Optional[int] = None

    def __post_init__(self):
        if self.src.component == self.dst.component:
            raise ValueError(f"self edge on component {self.src.component}")

    @property
    def key(self):
        return (self.src, self.dst, self.kind)

    def to_line(self) -> str:
        parts = ["E", self.kind.value, self.src.component, self.src.method,
                 self.dst.component, self.dst.method]
        if self.first_seen is not None:
            parts.append(str(self.first_seen))
        return " ".join(parts)


@dataclass(frozen=True)
class DependencyGraph:
    components: frozenset[str] = frozenset()
    edges: frozenset[DepEdge] = frozenset()
    _pair_counts: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        counts: dict[tuple[str, str], int] = {}
        for e in self.edges:
            for c in (e.src.component, e.dst.component):
                if c not in self.components:
                    raise ValueError(f"edge endpoint {c} not among components")
            pair = (e.src.component, e.dst.component)
            counts[pair] = counts.get(pair, 0) + 1
        object.__setattr__(self, "_pair_counts", counts)

    def sorted_edges(self) -> list[DepEdge]:
        return sorted(self.edges, key=DepEdge.to_line)

    def component_pairs(self) -> dict[tuple[str, str], int]:
        """Directed unique edge counts keyed by (src component, dst component)."""
        return dict(self._pair_counts)

    def subgraph(self, edges: Iterable[DepEdge]) -> "DependencyGraph":
        edges = frozenset(edges)
        comps = {e.src.component for e in edges} | {e.dst.component for e in edges}
        return DependencyGraph(frozenset(comps), edges)


def build_graph(records: Iterable[TraceRecord],
                tables: Mapping[str, SymbolTable] | None = None) -> DependencyGraph:
    tables = tables or {}
    first: dict[tuple[MethodRef, MethodRef], int] = {}
    components: set[str] = set()
    for rec in records:
        if rec.src_module == rec.dst_module:
            continue
        src = MethodRef(rec.src_module, site_label(rec.src_site, tables.get(rec.src_module)))
        dst = MethodRef(rec.dst_module, site_label(rec.dst_site, tables.get(rec.dst_module)))
        pair = (src, dst)
        if pair not in first or rec.counter < first[pair]:
            first[pair] = rec.counter
        components.update((rec.src_module, rec.dst_module))
    edges = frozenset(DepEdge(s, d, EdgeKind.DYNAMIC, c) for (s, d), c in first.items())
    return DependencyGraph(frozenset(components), edges)


def merge_static(graph: DependencyGraph,
                 imports: Iterable[tuple[str, str, Sequence[str]]]) -> DependencyGraph:
    """Add one static-import edge per (importer, imported, symbol)."""
    components = set(graph.components)
    edges = set(graph.edges)
    for importer, imported, symbols in imports:
        importer, imported = importer.lower(), imported.lower()
        if importer == imported:
            continue
        components.update((importer, imported))
        for sym in symbols:
            edges.add(DepEdge(MethodRef(importer, IMPORT_SITE), MethodRef(imported, sym),
                              EdgeKind.STATIC_IMPORT))
    return DependencyGraph(frozenset(components), frozenset(edges))


def directed_edge_count(graph: DependencyGraph, c1: str, c2: str) -> int:
    return graph._pair_counts.get((c1, c2), 0)


def write_graph(graph: DependencyGraph, out: TextIO) -> None:
    # isolated components have no edge line to carry them
    for c in sorted(graph.components):
        out.write(f"N {c}\n")
    for e in graph.sorted_edges():
        out.write(e.to_line() + "\n")


def read_graph(stream: TextIO | Iterable[str]) -> DependencyGraph:
    components: set[str] = set()
    edges: set[DepEdge] = set()
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        f = line.split()
        try:
            if f[0] == "N" and len(f) == 2:
                components.add(f[1])
            elif f[0] == "E" and len(f) in (6, 7):
                kind = EdgeKind(f[1])
                seen = int(f[6]) if len(f) == 7 else None
                e = DepEdge(MethodRef(f[2], f[3]), MethodRef(f[4], f[5]), kind, seen)
                components.update((f[2], f[4]))
                edges.add(e)
            else:
                raise MalformedGraph(lineno, "expected N or E record")
        except ValueError as exc:
            raise MalformedGraph(lineno, str(exc)) from None
    return DependencyGraph(frozenset(components), frozenset(edges))


def write_imports(entries: Iterable[tuple[str, str, Sequence[str]]], out: TextIO) -> None:
    for importer, imported, symbols in entries:
        for sym in symbols:
            out.write(f"I {importer} {imported} {sym}\n")


def read_imports(stream: TextIO | Iterable[str]) -> list[tuple[str, str, list[str]]]:
    grouped: dict[tuple[str, str], list[str]] = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        f = line.split()
        if f[0] != "I" or len(f) != 4:
            raise MalformedGraph(lineno, "expected 'I <importer> <imported> <symbol>'")
        grouped.setdefault((f[1].lower(), f[2].lower()), []).append(f[3])
    return [(a, b, syms) for (a, b), syms in grouped.items()]

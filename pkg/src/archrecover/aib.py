"""Agglomerative information bottleneck over component/attribute relations.

Components are objects and, since every dependency target is also a
component, every object is an attribute too. The pipeline is

    build_matrix -> tfidf -> normalize -> aib_cluster -> select_clustering

All information quantities are in bits.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from .depgraph import DependencyGraph
from .errors import BadK, MalformedGraph

# pairs whose information loss is within this of the minimum count as tied
TIE_TOL = 1e-12
# losses below this are rounding noise from merging (near-)identical rows
NOISE_FLOOR = 1e-14
CUT_EPS = 1e-12
SELF_ATTRIBUTE = "<self:{}>"


@dataclass(frozen=True)
class AttributeMatrix:
    """Weighted relation between objects and attributes.

    ``weights`` is a dense ``(n_objects, n_attributes)`` array in which NaN
    marks an absent weight.
    """

    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.objects), len(self.attributes)):
            raise ValueError(f"weights shape {w.shape} does not match "
                             f"{len(self.objects)} objects x {len(self.attributes)} attributes")
        missing = set(self.objects) - set(self.attributes)
        if missing:
            raise ValueError(f"objects missing from attributes: {sorted(missing)[:5]}")
        if np.any(w[~np.isnan(w)] < 0):
            raise ValueError("weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.weights)

    def get(self, obj: str, attr: str) -> Optional[float]:
        v = self.weights[self.objects.index(obj), self.attributes.index(attr)]
        return None if math.isnan(v) else float(v)

    def scaled(self, c: float) -> "AttributeMatrix":
        return AttributeMatrix(self.objects, self.attributes, self.weights * c)


@dataclass(frozen=True)
class ProbModel:
    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    priors: np.ndarray
    conditionals: np.ndarray

    def __post_init__(self):
        for arr in (self.priors, self.conditionals):
            arr.setflags(write=False)


@dataclass(frozen=True)
class MergeStep:
    left: int
    right: int
    result: int
    delta_i: float
    remaining: int

    def to_line(self, step: int) -> str:
        return (f"M {step} {self.left} {self.right} -> {self.result} "
                f"dI={self.delta_i:.12g} k={self.remaining}")


@dataclass(frozen=True)
class Dendrogram:
    """Merge history. Leaf ``i`` is ``leaves[i]``; merge ``s`` (0-based) creates id ``n + s``."""

    leaves: tuple[str, ...]
    steps: tuple[MergeStep, ...] = ()

    def __post_init__(self):
        n = len(self.leaves)
        if n and len(self.steps) != n - 1:
            raise ValueError(f"{n} leaves need {n - 1} merges, got {len(self.steps)}")
        alive = set(range(n))
        for s, st in enumerate(self.steps):
            if st.left not in alive or st.right not in alive or st.left == st.right:
                raise ValueError(f"merge {s + 1} joins unavailable clusters")
            if st.result != n + s or st.remaining != n - s - 1:
                raise ValueError(f"merge {s + 1} has inconsistent result id or count")
            alive -= {st.left, st.right}
            alive.add(st.result)

    def to_text(self) -> str:
        lines = [f"L {i} {name}" for i, name in enumerate(self.leaves)]
        lines += [st.to_line(s + 1) for s, st in enumerate(self.steps)]
        return "".join(line + "\n" for line in lines)

    def members(self, k: int) -> list[list[str]]:
        """Clusters left after cutting the history at ``k`` clusters."""
        n = len(self.leaves)
        groups: dict[int, list[int]] = {i: [i] for i in range(n)}
        for st in self.steps[: n - k]:
            groups[st.result] = groups.pop(st.left) + groups.pop(st.right)
        return [sorted(self.leaves[i] for i in g) for g in groups.values()]


@dataclass(frozen=True)
class Clustering:
    partition: Mapping[str, int]
    k: int = field(init=False)

    def __post_init__(self):
        labels = set(self.partition.values())
        if labels != set(range(len(labels))):
            raise ValueError("cluster labels must be contiguous from 0")
        object.__setattr__(self, "k", len(labels))

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[str]]) -> "Clustering":
        """Label groups 0..k-1 in order of their smallest member."""
        ordered = sorted((sorted(g) for g in groups if g), key=lambda g: g[0])
        return cls({o: i for i, g in enumerate(ordered) for o in g})

    def clusters(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for o in sorted(self.partition):
            out[self.partition[o]].append(o)
        return out

    def to_text(self) -> str:
        return "".join(f"P {o} {self.partition[o]}\n" for o in sorted(self.partition))


def build_matrix(graph: DependencyGraph) -> AttributeMatrix:
    """Symmetric unique-edge counts between components; no interaction is absent."""
    comps = tuple(sorted(graph.components))
    index = {c: i for i, c in enumerate(comps)}
    w = np.full((len(comps), len(comps)), np.nan)
    for (a, b), count in graph.component_pairs().items():
        i, j = index[a], index[b]
        for x, y in ((i, j), (j, i)):
            w[x, y] = (0.0 if np.isnan(w[x, y]) else w[x, y]) + count
    return AttributeMatrix(comps, comps, w)


def idf_factors(present: np.ndarray) -> np.ndarray:
    """Smoothed inverse document frequency ``log2(1 + n/df)``; NaN where df = 0."""
    n = present.shape[0]
    df = present.sum(axis=0).astype(float)
    with np.errstate(divide="ignore"):
        return np.where(df > 0, np.log2(1.0 + n / np.where(df > 0, df, 1.0)), np.nan)


def tfidf(matrix: AttributeMatrix) -> AttributeMatrix:
    if not matrix.objects:
        raise ValueError("tfidf needs at least one object")
    idf = idf_factors(matrix.present)
    return AttributeMatrix(matrix.objects, matrix.attributes, matrix.weights * idf)


def normalize(matrix: AttributeMatrix) -> ProbModel:
    """Row-normalize weights into p(a|o) under a uniform prior p(o) = 1/n.

    A row that holds attributes whose weights sum to zero becomes uniform over
    those attributes. A row holding nothing gets a private synthetic
    attribute with probability one.
    """
    w = matrix.weights
    present = matrix.present
    n = len(matrix.objects)
    attributes = list(matrix.attributes)
    empty = [i for i in range(n) if not present[i].any()]
    cond = np.zeros((n, len(attributes) + len(empty)))
    for i in range(n):
        row = present[i]
        if not row.any():
            continue
        vals = np.where(row, w[i], 0.0)
        total = vals.sum()
        if total > 0:
            cond[i, : len(attributes)] = vals / total
        else:
            cond[i, : len(attributes)] = row / row.sum()
    for extra, i in enumerate(empty):
        attributes.append(SELF_ATTRIBUTE.format(matrix.objects[i]))
        cond[i, len(matrix.attributes) + extra] = 1.0
    priors = np.full(n, 1.0 / n) if n else np.zeros(0)
    return ProbModel(tuple(matrix.objects), tuple(attributes), priors, cond)


def _kl_terms(p: np.ndarray, m: np.ndarray) -> np.ndarray:
    # sum_a p log2(p/m) along the last axis, with 0 log 0 = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0) / np.where(p > 0, m, 1.0)), 0.0)
    return t.sum(axis=-1)


def js_divergence(p, q, pi_p: float, pi_q: float) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share one attribute set")
    if not (pi_p > 0 and pi_q > 0 and abs(pi_p + pi_q - 1.0) <= 1e-12):
        raise ValueError("mixture weights must be positive and sum to 1")
    if np.array_equal(p, q):
        return 0.0
    m = pi_p * p + pi_q * q
    return float(pi_p * _kl_terms(p, m) + pi_q * _kl_terms(q, m))


def _pair_losses(w_i: float, p_i: np.ndarray, w: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Information loss of merging cluster (w_i, p_i) with each row of (w, P)."""
    tot = w_i + w
    m = (w_i * p_i + w[:, None] * P) / tot[:, None]
    d = w_i * _kl_terms(p_i[None, :], m) + w * _kl_terms(P, m)
    return np.where(d < NOISE_FLOOR, 0.0, d)


def _cluster_stats(c, model: ProbModel):
    names = [c] if isinstance(c, str) else list(c)
    idx = [model.objects.index(o) for o in names]
    w = model.priors[idx]
    total = float(w.sum())
    return total, (w[:, None] * model.conditionals[idx]).sum(axis=0) / total


def info_loss(ci, cj, model: ProbModel) -> float:
    """Mutual information lost by merging two clusters (object names or sets of them)."""
    wi, pi = _cluster_stats(ci, model)
    wj, pj = _cluster_stats(cj, model)
    if set([ci] if isinstance(ci, str) else ci) & set([cj] if isinstance(cj, str) else cj):
        raise ValueError("clusters must be disjoint")
    tot = wi + wj
    return tot * js_divergence(pi, pj, wi / tot, wj / tot)


def mutual_information(model: ProbModel) -> float:
    if not len(model.objects):
        return 0.0
    pa = model.priors @ model.conditionals
    per_obj = _kl_terms(model.conditionals, np.broadcast_to(pa, model.conditionals.shape))
    return float(model.priors @ per_obj)


def aib_cluster(model: ProbModel, tie_tol: float = TIE_TOL) -> Dendrogram:
    """Greedy agglomeration, always merging the pair that loses least information.

    Pairs within ``tie_tol`` of the minimum loss are tied; among them the
    pair with the lexicographically smallest (name, name) wins, a cluster's
    name being its smallest member.
    """
    n = len(model.objects)
    if n == 0:
        raise ValueError("cannot cluster an empty model")
    w = model.priors.astype(float).copy()
    P = model.conditionals.astype(float).copy()
    names = list(model.objects)
    ids = list(range(n))
    alive = np.ones(n, dtype=bool)

    D = np.full((n, n), np.inf)
    for i in range(n - 1):
        D[i, i + 1:] = _pair_losses(w[i], P[i], w[i + 1:], P[i + 1:])

    # rank of each slot's name, for vectorized tie-breaking
    order = {name: r for r, name in enumerate(sorted(set(names)))}
    rank = np.array([order[s] for s in names], dtype=np.int64)

    steps = []
    for s in range(n - 1):
        dmin = D.min()
        ti, tj = np.nonzero(D <= dmin + tie_tol)
        lo = np.minimum(rank[ti], rank[tj])
        hi = np.maximum(rank[ti], rank[tj])
        best = np.lexsort((hi, lo))[0]
        i, j = int(ti[best]), int(tj[best])
        if rank[j] < rank[i]:
            i, j = j, i
        delta = float(D[min(i, j), max(i, j)])

        # merged cluster lives in slot i
        wt = w[i] + w[j]
        P[i] = (w[i] * P[i] + w[j] * P[j]) / wt
        w[i] = wt
        steps.append(MergeStep(ids[i], ids[j], n + s, delta, n - s - 1))
        ids[i] = n + s
        alive[j] = False
        D[j, :] = np.inf
        D[:, j] = np.inf
        others = np.nonzero(alive)[0]
        others = others[others != i]
        if len(others):
            d = _pair_losses(w[i], P[i], w[others], P[others])
            before, after = others[others < i], others[others > i]
            D[before, i] = d[: len(before)]
            D[i, after] = d[len(before):]
    return Dendrogram(tuple(model.objects), tuple(steps))


def auto_cut(dendrogram: Dendrogram) -> int:
    """Cluster count just before the merge whose loss jumps most relative to its predecessor.

    Merges with loss below ``CUT_EPS`` are dropped before ratios are taken; the
    first remaining merge has no predecessor and is not a candidate. Without
    any candidate the whole history is taken (k = 1).
    """
    kept = [st for st in dendrogram.steps if st.delta_i >= CUT_EPS]
    best_ratio, best_k = -1.0, 1
    for prev, st in zip(kept, kept[1:]):
        ratio = st.delta_i / max(prev.delta_i, CUT_EPS)
        if ratio > best_ratio:
            best_ratio, best_k = ratio, st.remaining + 1
    return best_k


def select_clustering(dendrogram: Dendrogram, k: Optional[int] = None) -> Clustering:
    n = len(dendrogram.leaves)
    if k is None:
        k = auto_cut(dendrogram) if n else 0
    elif isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise BadK(k, n)
    return Clustering.from_groups(dendrogram.members(int(k)))


_M_LINE = re.compile(r"^M (\d+) (\d+) (\d+) -> (\d+) dI=(\S+) k=(\d+)$")


def read_dendrogram(stream: TextIO | Iterable[str]) -> Dendrogram:
    leaves: list[str] = []
    steps: list[MergeStep] = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("P "):
            continue
        f = line.split()
        if f[0] == "L" and len(f) == 3 and f[1] == str(len(leaves)):
            leaves.append(f[2])
            continue
        m = _M_LINE.match(line)
        if not m:
            raise MalformedGraph(lineno, "expected L, M or P record")
        _, left, right, result, d, rem = m.groups()
        steps.append(MergeStep(int(left), int(right), int(result), float(d), int(rem)))
    try:
        return Dendrogram(tuple(leaves), tuple(steps))
    except ValueError as exc:
        raise MalformedGraph(0, str(exc)) from None


def read_clustering(stream: TextIO | Iterable[str], tag: str = "P") -> Clustering:
    """Read ``<tag> <object> <label>`` lines; labels are re-numbered canonically."""
    groups: dict[str, list[str]] = {}
    for lineno, raw in enumerate(stream, 1):
        f = raw.split()
        if not f or f[0] != tag:
            continue
        if len(f) != 3:
            raise MalformedGraph(lineno, f"expected '{tag} <object> <label>'")
        groups.setdefault(f[2], []).append(f[1])
    return Clustering.from_groups(groups.values())

"""Synthetic systems with planted subsystem structure, and clustering scores.

Randomness comes from SplitMix64 (Steele, Lea & Flood 2014), implemented
here so fixtures do not depend on any library's generator stream:

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)                      (all arithmetic mod 2**64)

``uniform()`` is ``(out >> 11) * 2**-53``; ``below(n)`` rejects outputs at or
above the largest multiple of n and returns ``out % n``.

Generation visits every ordered component pair (src, dst), src != dst, in
component order (cluster by cluster, index within cluster). A pair inside one
cluster of size s is connected when ``uniform() < min(1, intra_degree/(s-1))``;
a pair spanning clusters when ``uniform() < inter_prob``. Each connected pair
then draws a source method and a destination method with ``below(m)`` and
emits one call record; counters run 1, 2, ...
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .aib import Clustering
from .errors import ObjectSetMismatch
from .trace import TraceRecord

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next()
            if x < limit:
                return x % n


@dataclass(frozen=True)
class SynthParams:
    cluster_sizes: tuple[int, ...]
    methods_per_component: int = 10
    intra_degree: float = 8.0
    inter_prob: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        if not self.cluster_sizes or min(self.cluster_sizes) < 1:
            raise ValueError("cluster sizes must be positive")
        if self.methods_per_component < 1:
            raise ValueError("methods_per_component must be positive")
        if not 0.0 <= self.inter_prob <= 1.0:
            raise ValueError("inter_prob must lie in [0, 1]")
        if self.intra_degree < 0:
            raise ValueError("intra_degree must be nonnegative")


def generate(params: SynthParams) -> tuple[list[TraceRecord], Clustering]:
    rng = SplitMix64(params.seed)
    comps = [(f"c{k}_{i}", k) for k, size in enumerate(params.cluster_sizes) for i in range(size)]
    intra_p = [min(1.0, params.intra_degree / (s - 1)) if s > 1 else 0.0
               for s in params.cluster_sizes]
    m = params.methods_per_component
    records = []
    for src, ks in comps:
        for dst, kd in comps:
            if src == dst:
                continue
            p = intra_p[ks] if ks == kd else params.inter_prob
            if rng.uniform() < p:
                records.append(TraceRecord(len(records) + 1, src, f"m{rng.below(m)}",
                                           dst, f"m{rng.below(m)}"))
    return records, Clustering({c: k for c, k in comps})


def write_truth(truth: Clustering, out: TextIO) -> None:
    for c in sorted(truth.partition):
        out.write(f"G {c} {truth.partition[c]}\n")


def _entropy(counts: Iterable[int], n: int) -> float:
    return -sum(c / n * math.log2(c / n) for c in counts if c)


def nmi(a: Clustering, b: Clustering) -> float:
    """Normalized mutual information 2 I(A;B) / (H(A) + H(B)), in [0, 1]."""
    if set(a.partition) != set(b.partition):
        raise ObjectSetMismatch("clusterings cover different objects")
    n = len(a.partition)
    if n == 0:
        return 1.0
    joint = Counter((a.partition[o], b.partition[o]) for o in a.partition)
    ca = Counter(a.partition.values())
    cb = Counter(b.partition.values())
    ha, hb = _entropy(ca.values(), n), _entropy(cb.values(), n)
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    mi = sum(c / n * math.log2(c * n / (ca[x] * cb[y])) for (x, y), c in joint.items())
    return min(1.0, max(0.0, 2 * mi / (ha + hb)))

"""Slow, loop-based reference computations kept apart from the library code."""
import math
from itertools import combinations


def mi_plain(priors, rows):
    """I(O;A) in bits from priors and conditional rows (lists of floats)."""
    m = len(rows[0]) if rows else 0
    pa = [sum(priors[i] * rows[i][a] for i in range(len(rows))) for a in range(m)]
    total = 0.0
    for i, row in enumerate(rows):
        for a, p in enumerate(row):
            if p > 0:
                total += priors[i] * p * math.log2(p / pa[a])
    return total


def merge_plain(priors, rows, i, j):
    """Priors and rows after merging clusters i and j (merged one takes slot i)."""
    w = priors[i] + priors[j]
    row = [(priors[i] * x + priors[j] * y) / w for x, y in zip(rows[i], rows[j])]
    keep = [k for k in range(len(rows)) if k not in (i, j)]
    return [w] + [priors[k] for k in keep], [row] + [rows[k] for k in keep], keep


def brute_force_losses(priors, rows):
    """Loss of every pair as I(before) - I(after merge)."""
    base = mi_plain(priors, rows)
    out = {}
    for i, j in combinations(range(len(rows)), 2):
        p2, r2, _ = merge_plain(priors, rows, i, j)
        out[(i, j)] = base - mi_plain(p2, r2)
    return out


def binary_entropy(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from archrecover.aib import Clustering
from archrecover.depgraph import build_graph
from archrecover.errors import UnknownPrimitive
from archrecover.significance import (
    SignificanceScore,
    label_cluster,
    overlay,
    rank_primitives,
    significance,
)
from archrecover.trace import TraceRecord


def graph(*pairs):
    return build_graph([TraceRecord(i, a, f"s{i}", b, f"t{i}") for i, (a, b) in enumerate(pairs)])


def test_no_external_edges_scores_zero():
    g = graph(("a", "b"), ("b", "a"))
    c = Clustering({"a": 0, "b": 0})
    s = significance("a", c, g)
    assert (s.ext, s.out_own, s.in_own, s.score) == (0, 1, 1, 0.0)


def test_formula():
    # 4 external, 1 outgoing own, 3 incoming own
    pairs = [("x", "q1"), ("x", "q2"), ("q3", "x"), ("q4", "x"),
             ("x", "y1"), ("y1", "x"), ("y2", "x"), ("y3", "x")]
    part = {"x": 0, "y1": 0, "y2": 0, "y3": 0, "q1": 1, "q2": 1, "q3": 1, "q4": 1}
    s = significance("x", Clustering(part), graph(*pairs))
    assert (s.ext, s.out_own, s.in_own) == (4, 1, 3)
    assert s.score == 2.0


def test_outgoing_ratio_orders():
    assert SignificanceScore("p", 3, 2, 0).score > SignificanceScore("q", 3, 0, 2).score


def test_unknown_primitive():
    with pytest.raises(UnknownPrimitive):
        significance("zz", Clustering({"a": 0}), graph())


def test_uncovered_component_counts_external():
    s = significance("a", Clustering({"a": 0, "b": 0}), graph(("a", "stray")))
    assert s.ext == 1


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_monotone_in_own_counts(ext, out_own, in_own):
    base = SignificanceScore("p", ext + 1, out_own, in_own).score
    assert SignificanceScore("p", ext + 1, out_own + 1, in_own).score > base
    assert SignificanceScore("p", ext + 1, out_own, in_own + 1).score < base


def scored_graph():
    """Cluster {X, Y, Z} with scores X=5 (ext 5), Y=3, Z=1; cluster {o1..o5} outside."""
    pairs = [("X", f"o{i}") for i in range(5)] + [("Y", f"o{i}") for i in range(3)] + [("Z", "o0")]
    part = {"X": 0, "Y": 0, "Z": 0, **{f"o{i}": 1 for i in range(5)}}
    return Clustering(part), graph(*pairs)


def test_label_top_two():
    c, g = scored_graph()
    assert [s.score for s in rank_primitives(["X", "Y", "Z"], c, g)] == [5.0, 3.0, 1.0]
    assert label_cluster(["Z", "Y", "X"], c, g, 2) == "X, Y"


def test_label_depth_capped():
    c, g = scored_graph()
    assert label_cluster(["X", "Y", "Z"], c, g, 10) == "X, Y, Z"


def test_label_singleton():
    assert label_cluster(["solo"], Clustering({"solo": 0}), graph(), 3) == "solo"


def test_label_tie_lexicographic():
    g = graph(("Y", "o1"), ("Y", "o2"), ("X", "o1"), ("X", "o2"))
    c = Clustering({"X": 0, "Y": 0, "o1": 1, "o2": 1})
    assert label_cluster(["Y", "X"], c, g, 1) == "X"


def test_scores_invariant_under_cluster_relabel():
    c, g = scored_graph()
    flipped = Clustering({p: 1 - k for p, k in c.partition.items()})
    for p in c.partition:
        assert significance(p, c, g) == significance(p, flipped, g)


# overlay

def rec(i, a, b):
    return TraceRecord(i, a, "f", b, f"g{i}")


USECASES = {
    "load": [rec(1, "a", "b"), rec(2, "a", "c")],
    "edit": [rec(1, "c", "d"), rec(2, "d", "a"), rec(3, "b", "a")],
}
PART = Clustering({"a": 0, "b": 0, "c": 1, "d": 1, "e": 2})


def brute_overlay(part, usecases):
    """Recompute overlay intensities with explicit edge sets and loops."""
    raw, names = {}, {}
    for p in part:
        hits = sorted(n for n, recs in usecases.items()
                      if any(p in (r.src_module, r.dst_module) for r in recs))
        names[p] = set(hits)
        edges = {(r.src_module, r.src_site, r.dst_module, r.dst_site)
                 for n in hits for r in usecases[n] if r.src_module != r.dst_module}
        if not hits:
            raw[p] = 0.0
            continue
        ext = sum(1 for e in edges if p in (e[0], e[2]) and part[e[2] if e[0] == p else e[0]] != part[p])
        out_own = sum(1 for e in edges if e[0] == p and part[e[2]] == part[p])
        in_own = sum(1 for e in edges if e[2] == p and part[e[0]] == part[p])
        raw[p] = (ext + 1) * (out_own + 1) / (in_own + 1)
    top = max(raw.values())
    return {p: (names[p], raw[p] / top if top else 0.0) for p in part}


def test_overlay_hand_scenario():
    anns = {a.primitive: a for a in overlay(PART, graph(), USECASES)}
    assert anns["e"].use_cases == frozenset() and anns["e"].intensity == 0.0
    assert anns["d"].use_cases == {"edit"}
    assert anns["a"].use_cases == {"load", "edit"}
    # smoothed scores: a=3, b=1, c=4, d=1
    assert {p: anns[p].intensity for p in "abcd"} == pytest.approx(
        {"a": 0.75, "b": 0.25, "c": 1.0, "d": 0.25})
    expected = brute_overlay(PART.partition, USECASES)
    for p, (names, inten) in expected.items():
        assert anns[p].use_cases == names
        assert anns[p].intensity == pytest.approx(inten)


def test_overlay_line_format():
    anns = overlay(PART, graph(), USECASES)
    assert [a.to_line() for a in anns] == [
        "O a 0.7500 edit,load",
        "O b 0.2500 edit,load",
        "O c 1.0000 edit,load",
        "O d 0.2500 edit",
        "O e 0.0000",
    ]


@given(st.integers(0, 2**32))
def test_overlay_properties(seed):
    rnd = random.Random(seed)
    comps = [f"p{i}" for i in range(6)]
    part = Clustering.from_groups([comps[:2], comps[2:4], comps[4:]])
    usecases = {}
    for u in range(rnd.randrange(0, 4)):
        usecases[f"u{u}"] = [TraceRecord(i, rnd.choice(comps), f"s{rnd.randrange(3)}",
                                         rnd.choice(comps), f"s{rnd.randrange(3)}")
                             for i in range(rnd.randrange(0, 8))]
    anns = overlay(part, graph(), usecases)
    expected = brute_overlay(part.partition, usecases)
    for a in anns:
        assert 0.0 <= a.intensity <= 1.0
        assert (a.intensity == 0.0) == (not a.use_cases)
        assert a.intensity == pytest.approx(expected[a.primitive][1])
    if any(a.intensity > 0 for a in anns):
        best = max(a.intensity for a in anns)
        assert best == 1.0
        top = min(a.primitive for a in anns if a.intensity == best)
        assert next(a for a in anns if a.primitive == top).intensity == 1.0

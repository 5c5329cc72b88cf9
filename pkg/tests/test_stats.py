import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphwatch.stats import (
    GraphStatistics,
    collect_statistics,
    degree_bucket,
    selectivity_score,
)
from graphwatch.synth import make_query
from tests.conftest import mk_edge, mk_stream


def brute_force_triads(edges) -> Counter:
    """Enumerate every edge pair and triple; independent of the streaming update."""
    census = Counter()
    edges = [e for e in edges if e.src != e.dst]
    for e, f in itertools.combinations(edges, 2):
        shared = {e.src, e.dst} & {f.src, f.dst}
        if len(shared) == 1 and len({e.src, e.dst, f.src, f.dst}) == 3:
            census["|".join(sorted((e.edge_type, f.edge_type)))] += 1
    for tri in itertools.combinations(edges, 3):
        nodes = set()
        for e in tri:
            nodes |= {e.src, e.dst}
        pairs = {frozenset((e.src, e.dst)) for e in tri}
        if len(nodes) != 3 or len(pairs) != 3:
            continue
        a, b, c = sorted(nodes)
        cycle = [(a, b), (b, c), (c, a)]
        forward = sum((e.src, e.dst) in cycle for e in tri)
        order = cycle if forward >= 2 else [(a, c), (c, b), (b, a)]
        seq = []
        for u, v in order:
            seq.append(next(e.edge_type for e in tri if {e.src, e.dst} == {u, v}))
        census["|".join(min(tuple(seq[i:] + seq[:i]) for i in range(3)))] += 1
    return census


def test_first_edge():
    stats = collect_statistics([mk_edge("a", "b", "connects")])
    assert stats.total_edges == 1
    assert stats.edge_type_counts == {"connects": 1}
    assert stats.vertex_type_counts == {"Host": 2}


def test_two_edges_form_one_wedge():
    stats = collect_statistics(mk_stream([("a", "x", "b", 1), ("b", "y", "c", 2)]))
    assert stats.triad_census == {"x|y": 1}


def test_closing_triangle():
    edges = mk_stream([("a", "x", "b", 1), ("b", "y", "c", 2), ("c", "z", "a", 3)])
    stats = collect_statistics(edges)
    expected = brute_force_triads(edges)
    assert expected == {"x|y": 1, "y|z": 1, "x|z": 1, "x|y|z": 1}
    assert stats.triad_census == expected


def test_parallel_edges_do_not_form_wedges():
    stats = collect_statistics(mk_stream([("a", "x", "b", 1), ("a", "x", "b", 2), ("b", "x", "a", 3)]))
    assert stats.triad_census == {}


def test_degree_histogram():
    stats = collect_statistics(mk_stream([("a", "x", "b", 1), ("a", "x", "c", 2)]))
    assert stats.degree_histogram == {1: 2, 2: 1}
    assert [degree_bucket(d) for d in (0, 16, 17, 32, 33)] == [0, 16, 32, 32, 64]


def test_self_loop_counts_twice_in_degree():
    stats = collect_statistics([mk_edge("a", "a")])
    assert stats.degree_histogram == {2: 1}
    assert stats.triad_census == {}


@pytest.mark.parametrize("seed", range(20))
def test_triad_census_matches_brute_force(seed):
    rng = random.Random(seed)
    vertices = [f"v{i}" for i in range(rng.randint(3, 9))]
    rows = []
    for t in range(rng.randint(1, 30)):
        a, b = rng.sample(vertices, 2)
        rows.append((a, rng.choice("xyz"), b, t))
    edges = mk_stream(rows)
    assert collect_statistics(edges).triad_census == brute_force_triads(edges)


_rows = st.lists(
    st.tuples(st.sampled_from("abcde"), st.sampled_from("xyz"), st.sampled_from("abcde"), st.integers(0, 50)),
    max_size=30,
)


@settings(max_examples=80, deadline=None)
@given(rows=_rows, rnd=st.randoms())
def test_counts_are_order_independent(rows, rnd):
    edges = mk_stream(rows)
    shuffled = list(edges)
    rnd.shuffle(shuffled)
    a, b = collect_statistics(edges), collect_statistics(shuffled)
    assert a.total_edges == b.total_edges == sum(a.edge_type_counts.values())
    assert a.edge_type_counts == b.edge_type_counts
    assert a.triad_census == b.triad_census == brute_force_triads(edges)
    assert a.degree_histogram == b.degree_histogram


class TestSelectivity:
    stats = GraphStatistics.from_edge_type_counts({"x": 100, "y": 1})
    q = make_query("p", [("a", "x", "b"), ("b", "y", "c"), ("c", "*", "d"), ("d", "w", "e")], 10)

    def test_rare_type(self):
        assert selectivity_score(self.stats, self.q, [1]) == pytest.approx(1 / 101)

    def test_common_type(self):
        assert selectivity_score(self.stats, self.q, [0]) == pytest.approx(100 / 101)

    def test_wildcard_and_unseen(self):
        assert selectivity_score(self.stats, self.q, [2]) == 1.0
        assert selectivity_score(self.stats, self.q, [3]) == pytest.approx(1 / 102)

    def test_cold_start(self):
        empty = GraphStatistics()
        assert selectivity_score(empty, self.q, [0]) == 1.0
        assert selectivity_score(empty, self.q, [2]) == 1.0

    def test_monotone_in_subgraph_size(self):
        scores = [selectivity_score(self.stats, self.q, range(k)) for k in range(1, 5)]
        assert scores == sorted(scores, reverse=True)

    def test_empty_subgraph_is_error(self):
        with pytest.raises(ValueError):
            selectivity_score(self.stats, self.q, [])


def test_stats_round_trip():
    stats = collect_statistics(mk_stream([("a", "x", "b", 1), ("b", "y", "c", 2), ("c", "z", "a", 3)]))
    loaded = GraphStatistics.from_dict(stats.to_dict())
    assert loaded.to_dict() == stats.to_dict()


def test_stats_document_must_be_consistent():
    with pytest.raises(ValueError):
        GraphStatistics.from_dict({"total_edges": 5, "edge_type_counts": {"x": 1}})

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphwatch.engine import Engine, LeafSearch, UnsupportedOperationError, local_search
from graphwatch.graph import DynamicGraph
from graphwatch.oracle import oracle_incremental_diff, oracle_windowed_matches
from graphwatch.stats import GraphStatistics
from graphwatch.synth import corpus_queries, make_query, random_stream
from tests.conftest import mk_edge, mk_stream

PATH2 = make_query("path2", [("A", "x", "B"), ("B", "y", "C")], 10)


def keys(emissions):
    return {(tuple(sorted(m.bindings.items())), m.signature) for m in emissions}


class TestRegister:
    def test_retention_follows_window(self):
        engine = Engine()
        engine.register_query(PATH2.with_window(60000))
        assert engine.graph.retention_window == 60000

    def test_retention_is_max(self):
        engine = Engine()
        engine.register_query(make_query("a", [("a", "x", "b")], 100))
        engine.register_query(make_query("b", [("a", "x", "b")], 5000))
        assert engine.graph.retention_window == 5000

    def test_after_streaming_started(self):
        engine = Engine()
        engine.register_query(PATH2)
        engine.process_edge(mk_edge("n1", "n2", "x", 1))
        with pytest.raises(UnsupportedOperationError):
            engine.register_query(make_query("late", [("a", "x", "b")], 10))

    def test_duplicate_name(self):
        engine = Engine()
        engine.register_query(PATH2)
        with pytest.raises(ValueError):
            engine.register_query(PATH2)


class TestLocalSearch:
    def test_single_edge_leaf(self):
        g = DynamicGraph()
        seed = mk_edge("n1", "n2", "x", 1)
        g.insert_edge(seed)
        found = local_search(g, PATH2, [0], seed, 10)
        assert len(found) == 1
        assert found[0].vertices == {"A": "n1", "B": "n2"}
        assert found[0].edges == {0: seed}

    def test_incompatible_seed(self):
        g = DynamicGraph()
        seed = mk_edge("n1", "n2", "z", 1)
        g.insert_edge(seed)
        assert local_search(g, PATH2, [0, 1], seed, 10) == []

    def test_two_edge_leaf_branches(self):
        stream = mk_stream([("n1", "x", "n2", 1), ("n4", "x", "n2", 2), ("n5", "x", "n6", 3), ("n2", "y", "n3", 4)])
        g = DynamicGraph()
        for e in stream:
            g.insert_edge(e)
        seed = stream[-1]
        found = local_search(g, PATH2, [0, 1], seed, 10)

        # Brute force: every pair of edges binding (x-edge, seed) consistently and injectively.
        expected = set()
        for e0, e1 in itertools.product(stream, [seed]):
            if e0.edge_type == "x" and e0.dst == e1.src and len({e0.src, e0.dst, e1.dst}) == 3:
                expected.add((e0.src, e0.dst, e1.dst))
        assert expected == {("n1", "n2", "n3"), ("n4", "n2", "n3")}
        assert {(f.vertices["A"], f.vertices["B"], f.vertices["C"]) for f in found} == expected

    def test_window_relative_to_seed(self):
        stream = mk_stream([("n1", "x", "n2", 0), ("n2", "y", "n3", 10)])
        g = DynamicGraph()
        for e in stream:
            g.insert_edge(e)
        assert local_search(g, PATH2, [0, 1], stream[1], 10) == []
        assert len(local_search(g, PATH2, [0, 1], stream[1], 11)) == 1

    def test_seed_self_loop_never_matches(self):
        g = DynamicGraph()
        seed = mk_edge("n1", "n1", "x", 0)
        g.insert_edge(seed)
        assert LeafSearch(PATH2, [0]).run(g, seed, 10) == []


class TestProcessEdge:
    def test_incomplete_pattern(self):
        engine = Engine()
        engine.register_query(PATH2)
        assert engine.process_edge(mk_edge("n1", "n2", "x", 1)) == []

    def test_minimal_completion(self):
        engine = Engine()
        engine.register_query(PATH2)
        stream = mk_stream([("n1", "x", "n2", 1), ("n2", "y", "n3", 2)])
        assert engine.process_edge(stream[0]) == []
        out = engine.process_edge(stream[1])
        assert len(out) == 1
        assert out[0].completed_at == 2
        assert out[0].bindings == {"A": "n1", "B": "n2", "C": "n3"}
        assert out[0].to_dict()["edges"] == [
            {"src": "n1", "dst": "n2", "etype": "x", "t": 1, "edge_key": 0, "qeid": 0},
            {"src": "n2", "dst": "n3", "etype": "y", "t": 2, "edge_key": 1, "qeid": 1},
        ]

    def test_window_exceeded(self):
        engine = Engine()
        engine.register_query(PATH2)
        assert engine.process_batch(mk_stream([("n1", "x", "n2", 1), ("n2", "y", "n3", 20)])) == []

    def test_out_of_plan_order_arrival(self):
        # The y edge arrives first; it must wait at its own leaf.
        engine = Engine(max_leaf_size=1)
        engine.register_query(PATH2, GraphStatistics.from_edge_type_counts({"x": 1, "y": 100}))
        out = engine.process_batch(mk_stream([("n2", "y", "n3", 1), ("n1", "x", "n2", 2)]))
        assert len(out) == 1

    def test_out_of_order_timestamps(self):
        engine = Engine()
        engine.register_query(PATH2)
        out = engine.process_batch(mk_stream([("n2", "y", "n3", 9), ("n1", "x", "n2", 5)]))
        assert [m.completed_at for m in out] == [9]

    def test_late_edges_counted(self):
        engine = Engine()
        engine.register_query(PATH2)
        engine.process_batch(mk_stream([("a", "x", "b", 100), ("c", "x", "d", 50)]))
        assert engine.dropped_late == 1
        assert engine.summary()["dropped_late"] == 1

    def test_emission_order_is_deterministic(self):
        q = make_query("fan", [("A", "x", "B")], 100)
        engine = Engine()
        engine.register_query(q)
        engine.register_query(q.__class__(name="fan2", vertices=q.vertices, edges=q.edges, window_ms=100))
        out = engine.process_edge(mk_edge("a", "b", "x", 3, key=7))
        assert [m.query for m in out] == ["fan", "fan2"]


@pytest.mark.parametrize("seed", range(3))
def test_triangle_random_stream_matches_oracle(seed):
    q = next(q for q in corpus_queries(150) if q.name == "triangle")
    stream = random_stream(seed, n_edges=300, plant=[q], plant_count=3)
    engine = Engine()
    engine.register_query(q)
    got = keys(engine.process_batch(stream))
    expected = {m.key for m in oracle_windowed_matches(stream, q)}
    assert expected and got == expected


@pytest.mark.parametrize("leaf_size", [1, 2, 3])
@pytest.mark.parametrize("q", corpus_queries(200), ids=lambda q: q.name)
def test_every_leaf_size_matches_oracle(q, leaf_size):
    stream = random_stream(5, n_edges=200, plant=[q])
    engine = Engine(max_leaf_size=leaf_size, expiry_stride=7)
    engine.register_query(q)
    assert keys(engine.process_batch(stream)) == {m.key for m in oracle_windowed_matches(stream, q)}


def test_incremental_emissions_match_oracle_diff():
    q = next(q for q in corpus_queries(100) if q.name == "path3")
    stream = random_stream(9, n_edges=60, plant=[q])
    engine = Engine()
    engine.register_query(q)
    for k, edge in enumerate(stream, start=1):
        assert keys(engine.process_edge(edge)) == {m.key for m in oracle_incremental_diff(stream, q, k)}


def test_infinite_window_tolerates_shuffled_arrival():
    q = next(q for q in corpus_queries(10**12) if q.name == "diamond")
    stream = random_stream(3, n_edges=150, plant=[q], shuffle_within=500)
    engine = Engine()
    engine.register_query(q)
    assert keys(engine.process_batch(stream)) == {m.key for m in oracle_windowed_matches(stream, q)}


@settings(max_examples=40, deadline=None)
@given(
    rows=st.lists(
        st.tuples(st.sampled_from("abcd"), st.sampled_from("xy"), st.sampled_from("abcd"), st.integers(0, 3)),
        max_size=25,
    ),
    window=st.integers(1, 8),
)
def test_small_streams_property(rows, window):
    q = make_query("p", [("A", "x", "B"), ("B", "y", "C"), ("C", "x", "A")], window)
    t = 0
    stream = []
    for i, (s, et, d, step) in enumerate(rows):
        t += step
        stream.append(mk_edge(s, d, et, t, i))
    engine = Engine(expiry_stride=1)
    engine.register_query(q)
    out = engine.process_batch(stream)
    assert all(m.span < window for m in out)
    assert len(out) == len(keys(out))
    assert keys(out) == {m.key for m in oracle_windowed_matches(stream, q)}


def test_appended_edge_gives_same_new_emissions_for_equal_graphs():
    q = make_query("p", [("A", "x", "B"), ("B", "y", "C")], 10**9)
    base = [("n1", "x", "n2", 1), ("n5", "x", "n2", 2)]
    a = mk_stream(base)
    b = mk_stream(list(reversed(base)))
    tail = mk_edge("n2", "n3", "y", 5, key=2)
    outs = []
    for stream in (a, b):
        engine = Engine()
        engine.register_query(q)
        engine.process_batch(stream)
        outs.append(sorted(tuple(sorted(m.bindings.items())) for m in engine.process_edge(tail)))
    assert outs[0] == outs[1] and len(outs[0]) == 2

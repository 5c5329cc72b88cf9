"""Synthetic workloads: a fixed query corpus and seeded random edge streams."""

from __future__ import annotations

import random
from collections.abc import Sequence
from typing import Optional

from graphwatch.graph import TimestampedEdge, VertexRef
from graphwatch.query import WILDCARD, QueryEdge, QueryGraph, QueryVertex, validate_query

EDGE_TYPES = ("x", "y", "z")
VERTEX_TYPES = ("Host", "Server")


def make_query(
    name: str,
    edges: Sequence[tuple[str, str, str]],
    window_ms: int,
    vertex_types: Optional[dict[str, str]] = None,
) -> QueryGraph:
    """Build a query from (src, etype, dst) triples; vertices default to wildcard type."""
    vertex_types = vertex_types or {}
    qids: list[str] = []
    for src, _, dst in edges:
        for qid in (src, dst):
            if qid not in qids:
                qids.append(qid)
    vertices = [QueryVertex(qid, vertex_types.get(qid, WILDCARD)) for qid in qids]
    qedges = [QueryEdge(i, src, dst, etype) for i, (src, etype, dst) in enumerate(edges)]
    return validate_query(name, vertices, qedges, window_ms)


def corpus_queries(window_ms: int = 1000) -> list[QueryGraph]:
    """Eight structural shapes over edge types x/y/z, each with at least one y edge."""
    host = "Host"
    server = "Server"
    return [
        make_query("path2", [("a", "x", "b"), ("b", "y", "c")], window_ms, {"a": host}),
        make_query(
            "path3",
            [("a", "x", "b"), ("b", "y", "c"), ("c", "z", "d")],
            window_ms,
            {"a": host, "d": server},
        ),
        make_query("star3", [("c", "x", "l1"), ("c", "y", "l2"), ("c", "z", "l3")], window_ms, {"c": host}),
        make_query("triangle", [("a", "x", "b"), ("b", "y", "c"), ("c", "z", "a")], window_ms),
        make_query(
            "cycle4",
            [("a", "x", "b"), ("b", "y", "c"), ("c", "x", "d"), ("d", "y", "a")],
            window_ms,
        ),
        make_query(
            "diamond",
            [("a", "x", "b"), ("a", "y", "c"), ("b", "z", "d"), ("c", "z", "d")],
            window_ms,
            {"a": host},
        ),
        make_query(
            "fork_join",
            [("s", "x", "m"), ("m", "y", "p1"), ("m", "y", "p2"), ("p1", "z", "j"), ("p2", "z", "j")],
            window_ms,
            {"s": host, "j": server},
        ),
        make_query(
            "tree5",
            [("r", "x", "a"), ("r", "y", "b"), ("a", "z", "c"), ("a", "x", "d"), ("b", "y", "e")],
            window_ms,
            {"r": host, "b": server},
        ),
    ]


def article_query(window_ms: int = 60_000) -> QueryGraph:
    """Three articles sharing one keyword and one location."""
    edges = []
    for a in ("a1", "a2", "a3"):
        edges.append((a, "mentions", "k"))
    for a in ("a1", "a2", "a3"):
        edges.append((a, "located_in", "l"))
    types = {"a1": "Article", "a2": "Article", "a3": "Article", "k": "Keyword", "l": "Location"}
    return make_query("common_keyword_location", edges, window_ms, types)


class StreamBuilder:
    """Accumulates edges with consistent vertex typing; edge_key is the list position."""

    def __init__(self, rng: random.Random, n_vertices: int, vertex_types: Sequence[str] = VERTEX_TYPES) -> None:
        self.rng = rng
        self.vertex_ids = [f"v{i}" for i in range(n_vertices)]
        self.vertex_type = {v: rng.choice(list(vertex_types)) for v in self.vertex_ids}
        self.records: list[tuple[int, str, str, str]] = []

    def add(self, t: int, src: str, etype: str, dst: str) -> None:
        self.records.append((t, src, etype, dst))

    def random_edge(self, t: int, edge_types: Sequence[str]) -> None:
        src, dst = self.rng.sample(self.vertex_ids, 2)
        self.add(t, src, self.rng.choice(list(edge_types)), dst)

    def plant(self, q: QueryGraph, t: int, spread: int) -> bool:
        """Insert one instance of ``q`` with timestamps in [t, t + spread]. False if no typed vertices fit."""
        pools = {}
        for v in q.vertices:
            if v.type_label == WILDCARD:
                pools[v.qid] = list(self.vertex_ids)
            else:
                pools[v.qid] = [u for u in self.vertex_ids if self.vertex_type[u] == v.type_label]
        chosen: dict[str, str] = {}
        for v in q.vertices:
            options = [u for u in pools[v.qid] if u not in chosen.values()]
            if not options:
                return False
            chosen[v.qid] = self.rng.choice(options)
        for e in q.edges:
            etype = e.edge_type if e.edge_type != WILDCARD else self.rng.choice(list(EDGE_TYPES))
            self.add(t + self.rng.randint(0, spread), chosen[e.source], etype, chosen[e.target])
        return True

    def build(self, shuffle_within: int = 0) -> list[TimestampedEdge]:
        """Edges ordered by timestamp (stable); optionally jitter order by up to ``shuffle_within`` ms."""
        records = sorted(self.records, key=lambda r: r[0])
        if shuffle_within:
            keyed = [(r[0] + self.rng.randint(0, shuffle_within), i, r) for i, r in enumerate(records)]
            records = [r for _, _, r in sorted(keyed)]
        out = []
        for key, (t, src, etype, dst) in enumerate(records):
            out.append(
                TimestampedEdge(
                    VertexRef(src, self.vertex_type[src]),
                    VertexRef(dst, self.vertex_type[dst]),
                    etype,
                    t,
                    key,
                )
            )
        return out


def random_stream(
    seed: int,
    n_edges: int = 200,
    n_vertices: int = 40,
    edge_types: Sequence[str] = EDGE_TYPES,
    plant: Sequence[QueryGraph] = (),
    plant_count: int = 2,
    max_step: int = 3,
    plant_spread: int = 10,
    shuffle_within: int = 0,
) -> list[TimestampedEdge]:
    """Random typed edges with non-decreasing timestamps and planted pattern instances.

    ``n_edges`` bounds the total, planted edges included.
    """
    rng = random.Random(seed)
    builder = StreamBuilder(rng, n_vertices)
    planted_edges = sum(len(q.edges) for q in plant) * plant_count
    n_random = max(0, n_edges - planted_edges)
    t = 0
    for _ in range(n_random):
        t += rng.randint(0, max_step)
        builder.random_edge(t, edge_types)
    horizon = max(t, 1)
    for q in plant:
        for _ in range(plant_count):
            builder.plant(q, rng.randint(0, horizon), plant_spread)
    return builder.build(shuffle_within)[:n_edges]


def throughput_stream(seed: int, n_edges: int = 100_000, n_vertices: int = 20_000) -> list[TimestampedEdge]:
    """Long monotone stream, about one edge per millisecond."""
    rng = random.Random(seed)
    builder = StreamBuilder(rng, n_vertices)
    t = 0
    for _ in range(n_edges):
        t += rng.randint(0, 2)
        builder.random_edge(t, EDGE_TYPES)
    return builder.build()

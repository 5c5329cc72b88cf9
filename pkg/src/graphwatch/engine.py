"""Continuous query execution over a shared windowed graph.

Every arriving edge is used as a seed for a local search against each leaf
primitive of each registered query. Leaf matches are pushed into that query's
join tree, and completions of the root are emitted. A match is found exactly
once: when the last of its edges (in arrival order) is processed.
"""

from __future__ import annotations

import bisect
import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any, Optional

from graphwatch.graph import DynamicGraph, InsertOutcome, TimestampedEdge
from graphwatch.planner import DEFAULT_MAX_LEAF_SIZE, DecompositionPlan, build_sj_tree, decompose
from graphwatch.query import QueryEdge, QueryGraph, edge_compatible
from graphwatch.sjtree import Match, SJTree
from graphwatch.stats import GraphStatistics

log = logging.getLogger(__name__)

DEFAULT_EXPIRY_STRIDE = 1024


class UnsupportedOperationError(RuntimeError):
    pass


def _timestamp(edge: TimestampedEdge) -> int:
    return edge.timestamp


class LeafSearch:
    """Precompiled seed-anchored search for one leaf primitive.

    For every query edge of the leaf that could be bound to the seed, the
    remaining edges are ordered so each one touches an already-bound vertex.
    """

    def __init__(self, q: QueryGraph, leaf_edges: Iterable[int]) -> None:
        self.q = q
        self.leaf_edges = frozenset(leaf_edges)
        self.plans: list[tuple[QueryEdge, tuple[QueryEdge, ...]]] = []
        for anchor in sorted(self.leaf_edges):
            self.plans.append((q.edges[anchor], self._extension_order(anchor)))

    def _extension_order(self, anchor: int) -> tuple[QueryEdge, ...]:
        q = self.q
        bound = {q.edges[anchor].source, q.edges[anchor].target}
        pending = sorted(self.leaf_edges - {anchor})
        order: list[QueryEdge] = []
        while pending:
            for i in pending:
                e = q.edges[i]
                if e.source in bound or e.target in bound:
                    order.append(e)
                    bound.update((e.source, e.target))
                    pending.remove(i)
                    break
            else:
                raise ValueError(f"leaf {sorted(self.leaf_edges)} is not connected")
        return tuple(order)

    def run(self, graph: DynamicGraph, seed: TimestampedEdge, window_ms: int) -> list[Match]:
        out: list[Match] = []
        if seed.src == seed.dst:
            return out  # query edges never join a vertex to itself
        q = self.q
        for anchor, rest in self.plans:
            if not edge_compatible(anchor, q, seed):
                continue
            vertices = {anchor.source: seed.src, anchor.target: seed.dst}
            edges = {anchor.qeid: seed}
            self._extend(graph, rest, 0, vertices, edges, seed.timestamp, seed.timestamp, window_ms, out)
        return out

    def _extend(
        self,
        graph: DynamicGraph,
        rest: tuple[QueryEdge, ...],
        depth: int,
        vertices: dict[str, str],
        edges: dict[int, TimestampedEdge],
        lo: int,
        hi: int,
        window_ms: int,
        out: list[Match],
    ) -> None:
        if depth == len(rest):
            out.append(Match(dict(vertices), dict(edges), lo, hi))
            return
        qe = rest[depth]
        src = vertices.get(qe.source)
        dst = vertices.get(qe.target)
        if src is not None:
            candidates = graph.out_edges(src)
        else:
            candidates = graph.in_edges(dst)
        if not candidates:
            return
        # Only edges that keep the span below the window.
        start = bisect.bisect_right(candidates, hi - window_ms, key=_timestamp)
        stop = bisect.bisect_left(candidates, lo + window_ms, key=_timestamp)
        q = self.q
        bound_values = vertices.values()
        for i in range(start, stop):
            e = candidates[i]
            if src is not None and dst is not None:
                if e.dst != dst:
                    continue
                new_qid = None
            elif src is not None:
                if e.dst in bound_values:
                    continue
                new_qid, new_vid = qe.target, e.dst
            else:
                if e.src in bound_values:
                    continue
                new_qid, new_vid = qe.source, e.src
            if not edge_compatible(qe, q, e):
                continue
            if any(b.edge_key == e.edge_key for b in edges.values()):
                continue
            edges[qe.qeid] = e
            if new_qid is not None:
                vertices[new_qid] = new_vid
            t = e.timestamp
            self._extend(
                graph, rest, depth + 1, vertices, edges,
                lo if lo < t else t, hi if hi > t else t, window_ms, out,
            )
            del edges[qe.qeid]
            if new_qid is not None:
                del vertices[new_qid]


def local_search(
    graph: DynamicGraph,
    q: QueryGraph,
    leaf_edges: Iterable[int],
    seed: TimestampedEdge,
    window_ms: int,
) -> list[Match]:
    """Every match of the leaf primitive that binds some leaf edge to ``seed``."""
    return LeafSearch(q, leaf_edges).run(graph, seed, window_ms)


@dataclass(frozen=True)
class EmittedMatch:
    query: str
    completed_at: int
    bindings: dict[str, str]
    edge_bindings: dict[int, TimestampedEdge]
    earliest: int

    @classmethod
    def from_match(cls, query: str, match: Match) -> EmittedMatch:
        return cls(
            query=query,
            completed_at=match.latest,
            bindings=dict(sorted(match.vertices.items())),
            edge_bindings=dict(sorted(match.edges.items())),
            earliest=match.earliest,
        )

    @property
    def span(self) -> int:
        return self.completed_at - self.earliest

    @property
    def signature(self) -> tuple[tuple[int, int], ...]:
        return tuple((q, e.edge_key) for q, e in self.edge_bindings.items())

    def sort_key(self) -> tuple:
        return (self.completed_at, self.signature, self.query)

    def to_dict(self) -> dict[str, Any]:
        edges = sorted(self.edge_bindings.items(), key=lambda item: item[1].sort_key)
        return {
            "query": self.query,
            "completed_at": self.completed_at,
            "bindings": self.bindings,
            "edges": [
                {
                    "src": e.src,
                    "dst": e.dst,
                    "etype": e.edge_type,
                    "t": e.timestamp,
                    "edge_key": e.edge_key,
                    "qeid": qeid,
                }
                for qeid, e in edges
            ],
        }


@dataclass
class QueryRuntime:
    query: QueryGraph
    plan: DecompositionPlan
    tree: SJTree
    searches: list[tuple[int, LeafSearch]] = field(default_factory=list)
    emitted_count: int = 0
    leaf_matches: int = 0
    peak_stored: int = 0

    @property
    def window_ms(self) -> int:
        return self.query.window_ms

    def counters(self) -> dict[str, Any]:
        return {
            "emitted": self.emitted_count,
            "leaf_matches": self.leaf_matches,
            "duplicates": self.tree.duplicates,
            "evicted": self.tree.evicted,
            "stored": self.tree.stored_matches(),
            "peak_stored": self.peak_stored,
            "rejections": dict(sorted(self.tree.rejections.items())),
        }


class Engine:
    """Owns the shared graph and one join tree per registered query. Single-threaded."""

    def __init__(
        self,
        max_leaf_size: int = DEFAULT_MAX_LEAF_SIZE,
        expiry_stride: int = DEFAULT_EXPIRY_STRIDE,
        sweep_interval: int = 4096,
    ) -> None:
        if expiry_stride < 1:
            raise ValueError("expiry_stride must be >= 1")
        self.max_leaf_size = max_leaf_size
        self.expiry_stride = expiry_stride
        self.graph = DynamicGraph(retention_window=None, sweep_interval=sweep_interval)
        self.runtimes: list[QueryRuntime] = []
        self.edges_processed = 0
        self.dropped_late = 0
        self.started = False

    def register_query(self, q: QueryGraph, stats: Optional[GraphStatistics] = None) -> QueryRuntime:
        if self.started:
            raise UnsupportedOperationError("queries must be registered before the first edge")
        if any(rt.query.name == q.name for rt in self.runtimes):
            raise ValueError(f"query {q.name!r} is already registered")
        stats = stats if stats is not None else GraphStatistics()
        plan = decompose(q, stats, self.max_leaf_size)
        tree = build_sj_tree(plan, q)
        runtime = QueryRuntime(q, plan, tree)
        for node_id, leaf in enumerate(plan.leaves):
            runtime.searches.append((node_id, LeafSearch(q, leaf)))
        self.runtimes.append(runtime)
        self.graph.set_retention_window(max(rt.window_ms for rt in self.runtimes))
        log.debug("registered %s with %d leaves", q.name, len(plan.leaves))
        return runtime

    def process_edge(self, edge: TimestampedEdge) -> list[EmittedMatch]:
        self.started = True
        outcome = self.graph.insert_edge(edge)
        self.edges_processed += 1
        emitted: list[EmittedMatch] = []
        if outcome is InsertOutcome.DROPPED_LATE:
            self.dropped_late += 1
        else:
            for rt in self.runtimes:
                window = rt.window_ms
                tree = rt.tree
                completions: list[Match] = []
                for node_id, search in rt.searches:
                    found = search.run(self.graph, edge, window)
                    rt.leaf_matches += len(found)
                    node = tree.nodes[node_id]
                    for m in found:
                        tree.push(node, m, window, completions)
                rt.emitted_count += len(completions)
                emitted.extend(EmittedMatch.from_match(rt.query.name, m) for m in completions)
        if self.edges_processed % self.expiry_stride == 0:
            self.expire()
        emitted.sort(key=EmittedMatch.sort_key)
        return emitted

    def process_batch(self, edges: Iterable[TimestampedEdge]) -> list[EmittedMatch]:
        out: list[EmittedMatch] = []
        for edge in edges:
            out.extend(self.process_edge(edge))
        return out

    def expire(self) -> int:
        watermark = self.graph.watermark
        if watermark is None:
            return 0
        total = 0
        for rt in self.runtimes:
            rt.peak_stored = max(rt.peak_stored, rt.tree.stored_matches())
            total += rt.tree.expire(watermark, rt.window_ms)
        return total

    def summary(self) -> dict[str, Any]:
        return {
            "edges_processed": self.edges_processed,
            "dropped_late": self.dropped_late,
            "retained_edges": self.graph.edge_count(),
            "queries": {rt.query.name: rt.counters() for rt in self.runtimes},
        }

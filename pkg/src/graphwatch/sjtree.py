"""Subgraph join tree: per-node partial-match tables and bottom-up joins.

Each node covers a subgraph of the query (a set of query edge indices). Leaves
hold matches of small search primitives; an internal node holds joins of one
match from each child, keyed on the child subgraphs' shared query vertices.
Completions of the root are handed back to the caller and never stored.
"""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Optional, Union

from graphwatch.graph import TimeInterval, TimestampedEdge


class RejectReason(str, enum.Enum):
    CUT_MISMATCH = "cut_mismatch"
    INJECTIVITY = "injectivity"
    WINDOW = "window"


class Match:
    """Binding of query vertices and edges to data vertices and edges."""

    __slots__ = ("vertices", "edges", "earliest", "latest", "_signature")

    def __init__(
        self,
        vertices: dict[str, str],
        edges: dict[int, TimestampedEdge],
        earliest: int,
        latest: int,
    ) -> None:
        self.vertices = vertices
        self.edges = edges
        self.earliest = earliest
        self.latest = latest
        self._signature: Optional[tuple[tuple[int, int], ...]] = None

    @classmethod
    def from_bindings(cls, vertices: Mapping[str, str], edges: Mapping[int, TimestampedEdge]) -> Match:
        stamps = [e.timestamp for e in edges.values()]
        return cls(dict(vertices), dict(edges), min(stamps), max(stamps))

    @property
    def interval(self) -> TimeInterval:
        return TimeInterval(self.earliest, self.latest)

    @property
    def span(self) -> int:
        return self.latest - self.earliest

    @property
    def edge_bindings(self) -> dict[int, int]:
        return {qeid: e.edge_key for qeid, e in self.edges.items()}

    @property
    def signature(self) -> tuple[tuple[int, int], ...]:
        """Sorted (qeid, edge_key) pairs; equal iff the edge bindings are equal."""
        if self._signature is None:
            self._signature = tuple(sorted((q, e.edge_key) for q, e in self.edges.items()))
        return self._signature

    def signature_text(self) -> str:
        return ",".join(f"{q}:{k}" for q, k in self.signature)

    def __repr__(self) -> str:
        return f"Match({self.vertices}, edges={self.edge_bindings}, [{self.earliest}, {self.latest}])"


def join_matches(
    left: Match, right: Match, cut_vertices: frozenset[str] | set[str], window_ms: int
) -> Union[Match, RejectReason]:
    """Merge matches of two sibling subgraphs, or say why they cannot be merged."""
    lv, rv = left.vertices, right.vertices
    for qid in cut_vertices:
        if lv[qid] != rv[qid]:
            return RejectReason.CUT_MISMATCH

    used = set(lv.values())
    vertices = dict(lv)
    for qid, vid in rv.items():
        if qid in vertices:
            continue
        if vid in used:
            return RejectReason.INJECTIVITY
        used.add(vid)
        vertices[qid] = vid

    left_keys = {e.edge_key for e in left.edges.values()}
    for e in right.edges.values():
        if e.edge_key in left_keys:
            return RejectReason.INJECTIVITY

    earliest = min(left.earliest, right.earliest)
    latest = max(left.latest, right.latest)
    if latest - earliest >= window_ms:
        return RejectReason.WINDOW
    edges = dict(left.edges)
    edges.update(right.edges)
    return Match(vertices, edges, earliest, latest)


@dataclass(eq=False)
class SJTreeNode:
    node_id: int
    edges: frozenset[int]
    vertices: frozenset[str]
    cut_vertices: frozenset[str] = frozenset()
    left: Optional[SJTreeNode] = None
    right: Optional[SJTreeNode] = None
    parent: Optional[SJTreeNode] = None
    score: Optional[float] = None
    # join key -> signature -> match, keyed on the parent's cut vertices
    table: dict[tuple[str, ...], dict[tuple, Match]] = field(default_factory=dict, repr=False)
    index: dict[tuple, tuple[str, ...]] = field(default_factory=dict, repr=False)
    key_qids: tuple[str, ...] = ()
    inserted: int = 0
    duplicates: int = 0
    evicted: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def is_root(self) -> bool:
        return self.parent is None

    @property
    def sibling(self) -> Optional[SJTreeNode]:
        if self.parent is None:
            return None
        return self.parent.right if self.parent.left is self else self.parent.left

    def __len__(self) -> int:
        return len(self.index)

    def matches(self) -> Iterator[Match]:
        for bucket in self.table.values():
            yield from bucket.values()


class SJTree:
    """A binary join tree over a query's edge set, with live match tables."""

    def __init__(self, root: SJTreeNode) -> None:
        self.root = root
        self.nodes: dict[int, SJTreeNode] = {}
        self._collect(root)
        for node in self.nodes.values():
            if node.parent is not None:
                node.key_qids = tuple(sorted(node.parent.cut_vertices))
        self.completions = 0
        self.rejections: Counter = Counter()

    def _collect(self, node: SJTreeNode) -> None:
        self.nodes[node.node_id] = node
        if node.left is not None:
            self._collect(node.left)
        if node.right is not None:
            self._collect(node.right)

    @property
    def leaves(self) -> list[SJTreeNode]:
        return [n for n in self.nodes.values() if n.is_leaf]

    def stored_matches(self) -> int:
        return sum(len(n) for n in self.nodes.values())

    @property
    def duplicates(self) -> int:
        return sum(n.duplicates for n in self.nodes.values())

    @property
    def evicted(self) -> int:
        return sum(n.evicted for n in self.nodes.values())

    def insert_and_propagate(self, node_id: int, match: Match, window_ms: int) -> list[Match]:
        """Store ``match`` at a node, join it upward, and return root completions."""
        try:
            node = self.nodes[node_id]
        except KeyError:
            raise KeyError(f"unknown SJ-Tree node {node_id}") from None
        if frozenset(match.edges) != node.edges:
            raise ValueError(
                f"match binds edges {sorted(match.edges)}, node {node_id} covers {sorted(node.edges)}"
            )
        out: list[Match] = []
        self._insert(node, match, window_ms, out)
        return out

    def push(self, node: SJTreeNode, match: Match, window_ms: int, out: list[Match]) -> None:
        """Unchecked ``insert_and_propagate`` for callers that built ``match`` for ``node``."""
        self._insert(node, match, window_ms, out)

    def _insert(self, node: SJTreeNode, match: Match, window_ms: int, out: list[Match]) -> None:
        parent = node.parent
        if parent is None:
            self.completions += 1
            out.append(match)
            return
        sig = match.signature
        if sig in node.index:
            node.duplicates += 1
            return
        vertices = match.vertices
        key = tuple([vertices[q] for q in node.key_qids])
        node.table.setdefault(key, {})[sig] = match
        node.index[sig] = key
        node.inserted += 1

        candidates = node.sibling.table.get(key)
        if not candidates:
            return
        left_side = parent.left is node
        cut = parent.cut_vertices
        # Recursion only touches ancestors, never the sibling table being read.
        for other in candidates.values():
            joined = (
                join_matches(match, other, cut, window_ms)
                if left_side
                else join_matches(other, match, cut, window_ms)
            )
            if isinstance(joined, Match):
                self._insert(parent, joined, window_ms, out)
            else:
                self.rejections[joined.value] += 1

    def expire(self, watermark: int, window_ms: int) -> int:
        """Drop stored matches with earliest <= watermark - window_ms."""
        cutoff = watermark - window_ms
        total = 0
        for node in self.nodes.values():
            if not node.index:
                continue
            removed = 0
            for key in list(node.table):
                bucket = node.table[key]
                stale = [sig for sig, m in bucket.items() if m.earliest <= cutoff]
                for sig in stale:
                    del bucket[sig]
                    del node.index[sig]
                removed += len(stale)
                if not bucket:
                    del node.table[key]
            node.evicted += removed
            total += removed
        return total

    def validate(self, graph_edges: Optional[Mapping[int, TimestampedEdge]] = None) -> None:
        """Debug check of every stored match. Raises AssertionError on a violation."""
        for node in self.nodes.values():
            for key, bucket in node.table.items():
                for sig, m in bucket.items():
                    assert sig == m.signature, f"node {node.node_id}: signature drift"
                    assert node.index.get(sig) == key, f"node {node.node_id}: index drift"
                    assert frozenset(m.edges) == node.edges, f"node {node.node_id}: wrong edge set"
                    assert set(m.vertices) == set(node.vertices), f"node {node.node_id}: wrong vertex set"
                    assert len(set(m.vertices.values())) == len(m.vertices), "vertex binding not injective"
                    keys = [e.edge_key for e in m.edges.values()]
                    assert len(set(keys)) == len(keys), "edge binding not injective"
                    stamps = [e.timestamp for e in m.edges.values()]
                    assert (m.earliest, m.latest) == (min(stamps), max(stamps)), "interval drift"
                    if graph_edges is not None:
                        for e in m.edges.values():
                            assert graph_edges.get(e.edge_key) is e, "edge not from stream"
            assert len(node.index) == sum(len(b) for b in node.table.values())

    def dump(self) -> dict:
        """Per-node table sizes and counters, for debugging."""
        nodes = []
        for node_id in sorted(self.nodes):
            n = self.nodes[node_id]
            nodes.append(
                {
                    "node": n.node_id,
                    "kind": "root" if n.is_root else ("leaf" if n.is_leaf else "internal"),
                    "edges": sorted(n.edges),
                    "cut": sorted(n.cut_vertices),
                    "stored": len(n),
                    "inserted": n.inserted,
                    "duplicates": n.duplicates,
                    "evicted": n.evicted,
                }
            )
        return {
            "nodes": nodes,
            "completions": self.completions,
            "rejections": dict(sorted(self.rejections.items())),
        }

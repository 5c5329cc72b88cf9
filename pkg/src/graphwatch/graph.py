"""Windowed, multi-relational property graph built from a timestamped edge stream."""

from __future__ import annotations

import bisect
import enum
import heapq
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Optional


class GraphError(Exception):
    """Base class for data graph errors."""


class TypeConflictError(GraphError):
    """A vertex id was re-declared with a different type label."""

    def __init__(self, vertex_id: str, existing: str, conflicting: str) -> None:
        super().__init__(
            f"vertex {vertex_id!r} already has type {existing!r}, got {conflicting!r}"
        )
        self.vertex_id = vertex_id
        self.existing = existing
        self.conflicting = conflicting


class InsertOutcome(enum.Enum):
    ACCEPTED = "accepted"
    DROPPED_LATE = "dropped_late"


class Direction(str, enum.Enum):
    OUT = "out"
    IN = "in"
    BOTH = "both"


@dataclass(frozen=True, slots=True)
class VertexRef:
    id: str
    type_label: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("vertex id must be non-empty")


@dataclass(frozen=True, slots=True)
class TimestampedEdge:
    """One stream record. Identity is the ``edge_key`` (stream ordinal)."""

    source: VertexRef
    target: VertexRef
    edge_type: str
    timestamp: int
    edge_key: int
    attributes: Mapping[str, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be >= 0, got {self.timestamp}")

    @property
    def src(self) -> str:
        return self.source.id

    @property
    def dst(self) -> str:
        return self.target.id

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.timestamp, self.edge_key)


@dataclass(frozen=True, slots=True)
class TimeInterval:
    earliest: int
    latest: int

    def __post_init__(self) -> None:
        if self.earliest > self.latest:
            raise ValueError(f"earliest {self.earliest} > latest {self.latest}")

    @property
    def span(self) -> int:
        return self.latest - self.earliest

    def merge(self, other: TimeInterval) -> TimeInterval:
        return TimeInterval(min(self.earliest, other.earliest), max(self.latest, other.latest))


def interval_of(edges: Iterable[TimestampedEdge]) -> TimeInterval:
    """Return the (earliest, latest) timestamps of a nonempty edge collection."""
    stamps = [e.timestamp for e in edges]
    if not stamps:
        raise ValueError("interval_of requires a nonempty edge set")
    return TimeInterval(min(stamps), max(stamps))


def _timestamp(edge: TimestampedEdge) -> int:
    return edge.timestamp


class DynamicGraph:
    """Adjacency store of recent edges.

    Per-vertex out/in lists are kept sorted by ``(timestamp, edge_key)``.
    Edges older than ``watermark - retention_window`` are evicted lazily when a
    vertex's lists are read, and by a full sweep every ``sweep_interval``
    insertions. ``retention_window=None`` keeps every edge.
    """

    def __init__(self, retention_window: Optional[int] = None, sweep_interval: int = 4096) -> None:
        if retention_window is not None and retention_window < 0:
            raise ValueError("retention_window must be >= 0")
        if sweep_interval < 1:
            raise ValueError("sweep_interval must be >= 1")
        self.retention_window = retention_window
        self.sweep_interval = sweep_interval
        self.watermark: Optional[int] = None
        self.late_count = 0
        self.evicted_count = 0
        self._vertex_types: dict[str, str] = {}
        self._out: dict[str, list[TimestampedEdge]] = {}
        self._in: dict[str, list[TimestampedEdge]] = {}
        self._inserts_since_sweep = 0

    # -- ingestion -----------------------------------------------------------

    def insert_edge(self, edge: TimestampedEdge) -> InsertOutcome:
        self._check_type(edge.source)
        self._check_type(edge.target)
        cutoff = self.cutoff
        if cutoff is not None and edge.timestamp < cutoff:
            self.late_count += 1
            return InsertOutcome.DROPPED_LATE

        self._vertex_types.setdefault(edge.source.id, edge.source.type_label)
        self._vertex_types.setdefault(edge.target.id, edge.target.type_label)
        _insort(self._out.setdefault(edge.src, []), edge)
        _insort(self._in.setdefault(edge.dst, []), edge)
        if self.watermark is None or edge.timestamp > self.watermark:
            self.watermark = edge.timestamp

        self._inserts_since_sweep += 1
        if self._inserts_since_sweep >= self.sweep_interval:
            self.sweep()
        return InsertOutcome.ACCEPTED

    def _check_type(self, vertex: VertexRef) -> None:
        known = self._vertex_types.get(vertex.id)
        if known is not None and known != vertex.type_label:
            raise TypeConflictError(vertex.id, known, vertex.type_label)

    # -- retention -----------------------------------------------------------

    @property
    def cutoff(self) -> Optional[int]:
        """Smallest timestamp still retained, or None when nothing is evicted."""
        if self.watermark is None or self.retention_window is None:
            return None
        return self.watermark - self.retention_window

    def set_retention_window(self, retention_window: Optional[int]) -> None:
        self.retention_window = retention_window

    def _trim(self, index: dict[str, list[TimestampedEdge]], vertex_id: str, cutoff: int) -> int:
        edges = index.get(vertex_id)
        if not edges or edges[0].timestamp >= cutoff:
            return 0
        n = bisect.bisect_left(edges, cutoff, key=_timestamp)
        del edges[:n]
        if not edges:
            del index[vertex_id]
        return n

    def sweep(self) -> int:
        """Evict every expired edge. Returns the number of edges removed."""
        self._inserts_since_sweep = 0
        cutoff = self.cutoff
        if cutoff is None:
            return 0
        removed = 0
        for vertex_id in list(self._out):
            removed += self._trim(self._out, vertex_id, cutoff)
        for vertex_id in list(self._in):
            self._trim(self._in, vertex_id, cutoff)
        self.evicted_count += removed
        return removed

    # -- access --------------------------------------------------------------

    def vertex_type(self, vertex_id: str) -> Optional[str]:
        return self._vertex_types.get(vertex_id)

    def out_edges(self, vertex_id: str) -> list[TimestampedEdge]:
        """Retained out-edges of a vertex, sorted by (timestamp, edge_key). Do not mutate."""
        cutoff = self.cutoff
        if cutoff is not None:
            self.evicted_count += self._trim(self._out, vertex_id, cutoff)
        return self._out.get(vertex_id, _EMPTY)

    def in_edges(self, vertex_id: str) -> list[TimestampedEdge]:
        cutoff = self.cutoff
        if cutoff is not None:
            self._trim(self._in, vertex_id, cutoff)
        return self._in.get(vertex_id, _EMPTY)

    def neighborhood(
        self,
        vertex_id: str,
        direction: Direction | str = Direction.BOTH,
        edge_type_filter: Optional[str] = None,
    ) -> list[TimestampedEdge]:
        direction = Direction(direction)
        if direction is Direction.OUT:
            edges: Iterable[TimestampedEdge] = self.out_edges(vertex_id)
        elif direction is Direction.IN:
            edges = self.in_edges(vertex_id)
        else:
            merged = heapq.merge(
                self.out_edges(vertex_id), self.in_edges(vertex_id), key=lambda e: e.sort_key
            )
            edges = _unique(merged)
        if edge_type_filter is None:
            return list(edges)
        return [e for e in edges if e.edge_type == edge_type_filter]

    def edges(self) -> Iterator[TimestampedEdge]:
        """Every retained edge, grouped by source vertex."""
        for vertex_id in list(self._out):
            yield from self.out_edges(vertex_id)

    def edge_count(self) -> int:
        return sum(len(v) for v in self._out.values())

    def vertex_count(self) -> int:
        return len(self._vertex_types)


_EMPTY: list[TimestampedEdge] = []


def _insort(edges: list[TimestampedEdge], edge: TimestampedEdge) -> None:
    # Near-monotone streams append at the tail; only stragglers pay for bisect.
    if not edges or edges[-1].sort_key <= edge.sort_key:
        edges.append(edge)
    else:
        bisect.insort(edges, edge, key=lambda e: e.sort_key)


def _unique(edges: Iterable[TimestampedEdge]) -> Iterator[TimestampedEdge]:
    # A self-loop sits in both the out and the in list of its vertex.
    last_key = None
    for e in edges:
        if e.edge_key != last_key:
            yield e
        last_key = e.edge_key

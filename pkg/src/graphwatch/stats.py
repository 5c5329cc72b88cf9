"""Summary statistics over an edge stream, and the selectivity estimate used for planning.

Triad census keys:

* wedge ``"a|b"`` - two edges sharing exactly one endpoint (the center) whose
  other endpoints differ; the two edge types are sorted.
* triangle ``"a|b|c"`` - three edges closing a cycle over three distinct
  vertices. Types are read around the cycle in the orientation that at least
  two of the three edges agree with, then rotated to the lexicographic minimum.

Wedges inside triangles are counted as wedges too. Self-loops contribute to
counts and degree but to no triad.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any, Optional

from graphwatch.graph import DynamicGraph, Direction, TimestampedEdge
from graphwatch.query import WILDCARD, QueryGraph

EXACT_DEGREE_BUCKETS = 16


def degree_bucket(degree: int) -> int:
    """Exact for degrees up to 16, otherwise the next power of two at or above."""
    if degree <= EXACT_DEGREE_BUCKETS:
        return degree
    return 1 << (degree - 1).bit_length()


def wedge_key(type_a: str, type_b: str) -> str:
    return "|".join(sorted((type_a, type_b)))


def min_rotation(types: tuple[str, str, str]) -> str:
    rotations = [types[i:] + types[:i] for i in range(3)]
    return "|".join(min(rotations))


@dataclass
class GraphStatistics:
    total_edges: int = 0
    vertex_type_counts: Counter = field(default_factory=Counter)
    edge_type_counts: Counter = field(default_factory=Counter)
    degree_histogram: Counter = field(default_factory=Counter)
    triad_census: Counter = field(default_factory=Counter)
    # Per-vertex total degree, needed to move vertices between histogram buckets.
    degrees: dict[str, int] = field(default_factory=dict, repr=False)

    def relative_frequency(self, edge_type: str) -> float:
        if edge_type == WILDCARD:
            return 1.0
        count = self.edge_type_counts.get(edge_type, 0)
        if count == 0:
            return 1.0 / (self.total_edges + 1)
        return count / self.total_edges

    def copy(self) -> GraphStatistics:
        return GraphStatistics(
            total_edges=self.total_edges,
            vertex_type_counts=Counter(self.vertex_type_counts),
            edge_type_counts=Counter(self.edge_type_counts),
            degree_histogram=Counter(self.degree_histogram),
            triad_census=Counter(self.triad_census),
            degrees=dict(self.degrees),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "total_edges": self.total_edges,
            "edge_type_counts": dict(sorted(self.edge_type_counts.items())),
            "vertex_type_counts": dict(sorted(self.vertex_type_counts.items())),
            "degree_histogram": {
                str(k): v for k, v in sorted(self.degree_histogram.items())
            },
            "triad_census": dict(sorted(self.triad_census.items())),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> GraphStatistics:
        """Load a stats file. Per-vertex degrees are not persisted, so the
        result is meant for planning, not for further updates."""
        try:
            stats = cls(
                total_edges=int(data["total_edges"]),
                edge_type_counts=Counter({str(k): int(v) for k, v in data["edge_type_counts"].items()}),
                vertex_type_counts=Counter(
                    {str(k): int(v) for k, v in data.get("vertex_type_counts", {}).items()}
                ),
                degree_histogram=Counter(
                    {int(k): int(v) for k, v in data.get("degree_histogram", {}).items()}
                ),
                triad_census=Counter({str(k): int(v) for k, v in data.get("triad_census", {}).items()}),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"invalid statistics document: {exc}") from None
        counts = [stats.total_edges, *stats.edge_type_counts.values(), *stats.vertex_type_counts.values()]
        if any(c < 0 for c in counts):
            raise ValueError("invalid statistics document: negative count")
        if sum(stats.edge_type_counts.values()) != stats.total_edges:
            raise ValueError("invalid statistics document: edge_type_counts do not sum to total_edges")
        return stats

    @classmethod
    def from_edge_type_counts(cls, counts: Mapping[str, int]) -> GraphStatistics:
        """Planning-only statistics from edge-type frequencies."""
        return cls(total_edges=sum(counts.values()), edge_type_counts=Counter(counts))


def _bump_degree(stats: GraphStatistics, vertex_id: str, delta: int) -> None:
    old = stats.degrees.get(vertex_id)
    if old is not None:
        bucket = degree_bucket(old)
        stats.degree_histogram[bucket] -= 1
        if stats.degree_histogram[bucket] == 0:
            del stats.degree_histogram[bucket]
    new = (old or 0) + delta
    stats.degrees[vertex_id] = new
    stats.degree_histogram[degree_bucket(new)] += 1


def _triangle_key(e: TimestampedEdge, f: TimestampedEdge, g: TimestampedEdge) -> str:
    """Key for the triangle e=(u->v), f between u and w, g between v and w."""
    u, v = e.src, e.dst
    # Agreement with the cyclic orientation u -> v -> w -> u.
    forward = 1 + (g.src == v) + (f.dst == u)
    if forward >= 2:
        seq = (e.edge_type, g.edge_type, f.edge_type)
    else:
        seq = (f.edge_type, g.edge_type, e.edge_type)
    return min_rotation(seq)


def update_statistics(
    stats: GraphStatistics, graph: DynamicGraph, edge: TimestampedEdge
) -> GraphStatistics:
    """Account for ``edge``, which must already be stored in ``graph``."""
    stats.total_edges += 1
    stats.edge_type_counts[edge.edge_type] += 1
    for vertex in (edge.source, edge.target):
        if vertex.id not in stats.degrees:
            stats.vertex_type_counts[vertex.type_label] += 1
    if edge.src == edge.dst:
        _bump_degree(stats, edge.src, 2)
        return stats
    _bump_degree(stats, edge.src, 1)
    _bump_degree(stats, edge.dst, 1)

    u, v = edge.src, edge.dst
    at_v: dict[str, list[TimestampedEdge]] = {}
    for g in graph.neighborhood(v, Direction.BOTH):
        w = g.dst if g.src == v else g.src
        if g.edge_key == edge.edge_key or w == v or w == u:
            continue
        stats.triad_census[wedge_key(edge.edge_type, g.edge_type)] += 1
        at_v.setdefault(w, []).append(g)
    for f in graph.neighborhood(u, Direction.BOTH):
        w = f.dst if f.src == u else f.src
        if f.edge_key == edge.edge_key or w == u or w == v:
            continue
        stats.triad_census[wedge_key(edge.edge_type, f.edge_type)] += 1
        for g in at_v.get(w, ()):
            stats.triad_census[_triangle_key(edge, f, g)] += 1
    return stats


def collect_statistics(edges: Iterable[TimestampedEdge], graph: Optional[DynamicGraph] = None) -> GraphStatistics:
    """One pass over ``edges`` with infinite retention unless a graph is supplied."""
    graph = graph if graph is not None else DynamicGraph(retention_window=None)
    stats = GraphStatistics()
    for edge in edges:
        graph.insert_edge(edge)
        update_statistics(stats, graph, edge)
    return stats


def selectivity_score(stats: GraphStatistics, q: QueryGraph, qeids: Iterable[int]) -> float:
    """Independence estimate of how often a query subgraph occurs; lower is rarer."""
    factors = sorted(stats.relative_frequency(q.edges[i].edge_type) for i in qeids)
    if not factors:
        raise ValueError("selectivity_score requires a nonempty edge set")
    # Fixed multiplication order so equal multisets give bit-identical scores.
    score = 1.0
    for f in factors:
        score *= f
    return score


def load_statistics(path: str) -> GraphStatistics:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid statistics JSON at line {exc.lineno}: {exc.msg}") from None
    return GraphStatistics.from_dict(data)


def save_statistics(stats: GraphStatistics, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2)
        fh.write("\n")

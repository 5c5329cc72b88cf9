"""Query graphs: typed patterns with a time window, and their JSON file format.

Matching is non-induced subgraph isomorphism that is injective on both
vertices and edges. Undirected patterns are expressed as two directed query
edges. ``"*"`` in a vertex ``type`` or edge ``etype`` matches anything.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property
from typing import Any

from graphwatch.graph import TimestampedEdge

WILDCARD = "*"


class QueryValidationError(ValueError):
    """Raised for malformed or invalid query definitions.

    ``location`` names the offending field (``edges[2].src``) or JSON line.
    """

    def __init__(self, message: str, location: str | None = None) -> None:
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass(frozen=True, slots=True)
class QueryVertex:
    qid: str
    type_label: str = WILDCARD


@dataclass(frozen=True, slots=True)
class QueryEdge:
    qeid: int
    source: str
    target: str
    edge_type: str = WILDCARD


@dataclass(frozen=True)
class QueryGraph:
    name: str
    vertices: tuple[QueryVertex, ...]
    edges: tuple[QueryEdge, ...]
    window_ms: int

    @cached_property
    def vertex_types(self) -> dict[str, str]:
        return {v.qid: v.type_label for v in self.vertices}

    def vertex_type(self, qid: str) -> str:
        return self.vertex_types[qid]

    def edge(self, qeid: int) -> QueryEdge:
        return self.edges[qeid]

    def edge_signature(self, qeid: int) -> tuple[str, str, str]:
        """(etype, src_type, dst_type) for tie-breaking in planning."""
        e = self.edges[qeid]
        return (e.edge_type, self.vertex_types[e.source], self.vertex_types[e.target])

    def vertices_of(self, qeids: Iterable[int]) -> frozenset[str]:
        out: set[str] = set()
        for i in qeids:
            out.add(self.edges[i].source)
            out.add(self.edges[i].target)
        return frozenset(out)

    def with_window(self, window_ms: int) -> QueryGraph:
        return validate_query(self.name, self.vertices, self.edges, window_ms)


def edge_compatible(query_edge: QueryEdge, q: QueryGraph, data_edge: TimestampedEdge) -> bool:
    """True when ``data_edge`` can be bound to ``query_edge`` in direction and types."""
    if query_edge.edge_type != WILDCARD and query_edge.edge_type != data_edge.edge_type:
        return False
    src_type = q.vertex_types[query_edge.source]
    if src_type != WILDCARD and src_type != data_edge.source.type_label:
        return False
    dst_type = q.vertex_types[query_edge.target]
    return dst_type == WILDCARD or dst_type == data_edge.target.type_label


def validate_query(
    name: str,
    vertices: Iterable[QueryVertex],
    edges: Iterable[QueryEdge],
    window_ms: int,
) -> QueryGraph:
    vertices = tuple(vertices)
    edges = tuple(edges)
    if not isinstance(name, str) or not name:
        raise QueryValidationError("query name must be a non-empty string", "name")
    if isinstance(window_ms, bool) or not isinstance(window_ms, int) or window_ms <= 0:
        raise QueryValidationError(f"must be a positive integer, got {window_ms!r}", "window_ms")

    seen: set[str] = set()
    for i, v in enumerate(vertices):
        if not isinstance(v.qid, str) or not v.qid:
            raise QueryValidationError("qid must be a non-empty string", f"vertices[{i}].qid")
        if v.qid in seen:
            raise QueryValidationError(f"duplicate qid {v.qid!r}", f"vertices[{i}].qid")
        if not isinstance(v.type_label, str) or not v.type_label:
            raise QueryValidationError("type must be a non-empty string", f"vertices[{i}].type")
        seen.add(v.qid)

    if not edges:
        raise QueryValidationError("query needs at least one edge", "edges")
    for i, e in enumerate(edges):
        if e.qeid != i:
            raise QueryValidationError(f"qeid {e.qeid} does not match position {i}", f"edges[{i}]")
        for end, qid in (("src", e.source), ("dst", e.target)):
            if qid not in seen:
                raise QueryValidationError(f"undeclared vertex {qid!r}", f"edges[{i}].{end}")
        if e.source == e.target:
            raise QueryValidationError(f"self-loop on {e.source!r} is not supported", f"edges[{i}]")
        if not isinstance(e.edge_type, str) or not e.edge_type:
            raise QueryValidationError("etype must be a non-empty string", f"edges[{i}].etype")

    # Undirected connectivity over all declared vertices.
    adjacency: dict[str, set[str]] = {v.qid: set() for v in vertices}
    for e in edges:
        adjacency[e.source].add(e.target)
        adjacency[e.target].add(e.source)
    start = vertices[0].qid
    reached = {start}
    stack = [start]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in reached:
                reached.add(nxt)
                stack.append(nxt)
    if len(reached) != len(adjacency):
        missing = sorted(set(adjacency) - reached)
        raise QueryValidationError(f"pattern is disconnected; unreachable: {missing}", "edges")

    return QueryGraph(name=name, vertices=vertices, edges=edges, window_ms=window_ms)


def _require(obj: dict[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise QueryValidationError(f"missing required key {key!r}", where)
    return obj[key]


def query_from_dict(data: Any) -> QueryGraph:
    if not isinstance(data, dict):
        raise QueryValidationError("query must be a JSON object", "<root>")
    name = _require(data, "name", "<root>")
    window_ms = _require(data, "window_ms", "<root>")
    raw_vertices = _require(data, "vertices", "<root>")
    raw_edges = _require(data, "edges", "<root>")
    if not isinstance(raw_vertices, list):
        raise QueryValidationError("must be a list", "vertices")
    if not isinstance(raw_edges, list):
        raise QueryValidationError("must be a list", "edges")

    vertices = []
    for i, v in enumerate(raw_vertices):
        if not isinstance(v, dict):
            raise QueryValidationError("must be an object", f"vertices[{i}]")
        vertices.append(
            QueryVertex(_require(v, "qid", f"vertices[{i}]"), _require(v, "type", f"vertices[{i}]"))
        )
    edges = []
    for i, e in enumerate(raw_edges):
        if not isinstance(e, dict):
            raise QueryValidationError("must be an object", f"edges[{i}]")
        edges.append(
            QueryEdge(
                i,
                _require(e, "src", f"edges[{i}]"),
                _require(e, "dst", f"edges[{i}]"),
                _require(e, "etype", f"edges[{i}]"),
            )
        )
    return validate_query(name, vertices, edges, window_ms)


def parse_query(text: str) -> QueryGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryValidationError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return query_from_dict(data)


def query_to_dict(q: QueryGraph) -> dict[str, Any]:
    return {
        "name": q.name,
        "window_ms": q.window_ms,
        "vertices": [{"qid": v.qid, "type": v.type_label} for v in q.vertices],
        "edges": [{"src": e.source, "dst": e.target, "etype": e.edge_type} for e in q.edges],
    }


def serialize_query(q: QueryGraph) -> str:
    return json.dumps(query_to_dict(q), indent=2) + "\n"


def load_query(path: str) -> QueryGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_query(fh.read())

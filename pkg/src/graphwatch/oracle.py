"""Brute-force reference matcher over a fully materialized stream.

Test-only. It sees every edge of the stream (no retention, no expiry) and
applies only the type, injectivity, and span < window constraints, so it
shares no code path with the incremental engine.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from graphwatch.graph import TimestampedEdge
from graphwatch.query import WILDCARD, QueryGraph

MAX_STREAM_EDGES = 500
MAX_QUERY_EDGES = 6


class OracleBudgetError(ValueError):
    """Input is beyond the exhaustive-enumeration budget."""


@dataclass(frozen=True, order=True)
class OracleMatch:
    vertex_bindings: tuple[tuple[str, str], ...]
    edge_bindings: tuple[tuple[int, int], ...]
    earliest: int
    latest: int

    @property
    def key(self) -> tuple:
        return (self.vertex_bindings, self.edge_bindings)


def _type_ok(pattern: str, actual: str) -> bool:
    return pattern == WILDCARD or pattern == actual


def _fixed_order(q: QueryGraph) -> list[int]:
    # Query edges in index order, except that each next edge touches an earlier one.
    order = [0]
    seen = {q.edges[0].source, q.edges[0].target}
    pending = list(range(1, len(q.edges)))
    while pending:
        for i in pending:
            e = q.edges[i]
            if e.source in seen or e.target in seen:
                break
        else:
            i = pending[0]
        pending.remove(i)
        order.append(i)
        seen.update((q.edges[i].source, q.edges[i].target))
    return order


def oracle_windowed_matches(
    stream: Sequence[TimestampedEdge],
    q: QueryGraph,
    *,
    max_edges: int = MAX_STREAM_EDGES,
    max_query_edges: int = MAX_QUERY_EDGES,
) -> frozenset[OracleMatch]:
    """Every injective binding of all query edges to stream edges with span < window."""
    if len(stream) > max_edges:
        raise OracleBudgetError(f"stream has {len(stream)} edges, oracle budget is {max_edges}")
    if len(q.edges) > max_query_edges:
        raise OracleBudgetError(f"query has {len(q.edges)} edges, oracle budget is {max_query_edges}")

    vtype = {v.qid: v.type_label for v in q.vertices}
    candidates: dict[int, list[TimestampedEdge]] = {}
    for qe in q.edges:
        candidates[qe.qeid] = [
            e
            for e in stream
            if _type_ok(qe.edge_type, e.edge_type)
            and _type_ok(vtype[qe.source], e.source.type_label)
            and _type_ok(vtype[qe.target], e.target.type_label)
            and e.src != e.dst
        ]

    order = _fixed_order(q)
    window = q.window_ms
    results: set[OracleMatch] = set()
    vmap: dict[str, str] = {}
    emap: dict[int, TimestampedEdge] = {}

    def backtrack(pos: int) -> None:
        if pos == len(order):
            stamps = [e.timestamp for e in emap.values()]
            results.add(
                OracleMatch(
                    tuple(sorted(vmap.items())),
                    tuple(sorted((k, e.edge_key) for k, e in emap.items())),
                    min(stamps),
                    max(stamps),
                )
            )
            return
        qe = q.edges[order[pos]]
        used_keys = {e.edge_key for e in emap.values()}
        stamps = [e.timestamp for e in emap.values()]
        for e in candidates[qe.qeid]:
            if e.edge_key in used_keys:
                continue
            if stamps and max(max(stamps), e.timestamp) - min(min(stamps), e.timestamp) >= window:
                continue
            added = []
            ok = True
            for qid, vid in ((qe.source, e.src), (qe.target, e.dst)):
                if qid in vmap:
                    if vmap[qid] != vid:
                        ok = False
                        break
                elif vid in vmap.values():
                    ok = False
                    break
                else:
                    vmap[qid] = vid
                    added.append(qid)
            if ok:
                emap[qe.qeid] = e
                backtrack(pos + 1)
                del emap[qe.qeid]
            for qid in added:
                del vmap[qid]

    backtrack(0)
    return frozenset(results)


def oracle_incremental_diff(
    stream: Sequence[TimestampedEdge], q: QueryGraph, k: int, **budget: int
) -> frozenset[OracleMatch]:
    """Matches present after the first ``k`` edges but not after ``k - 1`` (1-based ``k``)."""
    if not 1 <= k <= len(stream):
        raise IndexError(f"k={k} outside 1..{len(stream)}")
    after = oracle_windowed_matches(stream[:k], q, **budget)
    before = oracle_windowed_matches(stream[: k - 1], q, **budget)
    return after - before


def oracle_emissions(stream: Sequence[TimestampedEdge], q: QueryGraph, **budget: int) -> list[dict[str, Any]]:
    """Oracle matches in the engine's emission format, sorted by (completion time, signature)."""
    by_key = {e.edge_key: e for e in stream}
    out = []
    for m in sorted(oracle_windowed_matches(stream, q, **budget), key=lambda m: (m.latest, m.edge_bindings)):
        bound = sorted(((by_key[k], qeid) for qeid, k in m.edge_bindings), key=lambda p: (p[0].timestamp, p[0].edge_key))
        out.append(
            {
                "query": q.name,
                "completed_at": m.latest,
                "bindings": dict(m.vertex_bindings),
                "edges": [
                    {
                        "src": e.src,
                        "dst": e.dst,
                        "etype": e.edge_type,
                        "t": e.timestamp,
                        "edge_key": e.edge_key,
                        "qeid": qeid,
                    }
                    for e, qeid in bound
                ],
            }
        )
    return out

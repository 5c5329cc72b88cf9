"""Continuous subgraph-pattern queries over timestamped edge streams."""

from graphwatch.engine import EmittedMatch, Engine, QueryRuntime, UnsupportedOperationError, local_search
from graphwatch.graph import (
    DynamicGraph,
    InsertOutcome,
    TimeInterval,
    TimestampedEdge,
    TypeConflictError,
    VertexRef,
    interval_of,
)
from graphwatch.planner import DecompositionPlan, build_sj_tree, decompose
from graphwatch.query import QueryGraph, QueryValidationError, edge_compatible, parse_query, serialize_query
from graphwatch.sjtree import Match, RejectReason, SJTree, join_matches
from graphwatch.stats import GraphStatistics, selectivity_score, update_statistics

__version__ = "0.1.0"

__all__ = [
    "DecompositionPlan",
    "DynamicGraph",
    "EmittedMatch",
    "Engine",
    "GraphStatistics",
    "InsertOutcome",
    "Match",
    "QueryGraph",
    "QueryRuntime",
    "QueryValidationError",
    "RejectReason",
    "SJTree",
    "TimeInterval",
    "TimestampedEdge",
    "TypeConflictError",
    "UnsupportedOperationError",
    "VertexRef",
    "build_sj_tree",
    "decompose",
    "edge_compatible",
    "interval_of",
    "join_matches",
    "local_search",
    "parse_query",
    "selectivity_score",
    "serialize_query",
    "update_statistics",
]

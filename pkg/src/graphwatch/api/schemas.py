"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class EdgeRecord(BaseModel):
    """One edge, same keys as a line of an edge stream file."""

    model_config = ConfigDict(extra="forbid")

    t: int = Field(..., ge=0)
    src: str = Field(..., min_length=1)
    src_type: str = Field(..., min_length=1)
    dst: str = Field(..., min_length=1)
    dst_type: str = Field(..., min_length=1)
    etype: str = Field(..., min_length=1)
    attrs: dict[str, str] = Field(default_factory=dict)


class QueryVertexModel(BaseModel):
    qid: str
    type: str = "*"


class QueryEdgeModel(BaseModel):
    src: str
    dst: str
    etype: str = "*"


class QueryModel(BaseModel):
    name: str
    window_ms: int
    vertices: list[QueryVertexModel]
    edges: list[QueryEdgeModel]


class StatsModel(BaseModel):
    total_edges: int = Field(0, ge=0)
    edge_type_counts: dict[str, int] = Field(default_factory=dict)
    vertex_type_counts: dict[str, int] = Field(default_factory=dict)
    degree_histogram: dict[str, int] = Field(default_factory=dict)
    triad_census: dict[str, int] = Field(default_factory=dict)


class EdgeBatch(BaseModel):
    edges: list[EdgeRecord]


class PlanRequest(BaseModel):
    query: QueryModel
    stats: Optional[StatsModel] = None
    max_leaf_size: int = Field(2, ge=1, le=3)


class PlanNode(BaseModel):
    node: int
    kind: str
    edges: list[int]
    cut: list[str]
    score: Optional[float] = None


class PlanResponse(BaseModel):
    query: str
    leaves: list[list[int]]
    scores: list[float]
    nodes: list[PlanNode]
    text: str


class RegisterRequest(BaseModel):
    query: QueryModel
    stats: Optional[StatsModel] = None


class EmittedEdge(BaseModel):
    src: str
    dst: str
    etype: str
    t: int
    edge_key: int
    qeid: int


class Emission(BaseModel):
    query: str
    completed_at: int
    bindings: dict[str, str]
    edges: list[EmittedEdge]


class IngestResponse(BaseModel):
    accepted: int
    emissions: list[Emission]


class OracleRequest(BaseModel):
    query: QueryModel
    edges: list[EdgeRecord]


class SessionConfig(BaseModel):
    max_leaf_size: int = Field(2, ge=1, le=3)
    expiry_stride: int = Field(1024, ge=1)

"""HTTP front end: stateless planning/statistics/oracle endpoints plus one live engine session."""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, HTTPException

from graphwatch.api.schemas import (
    EdgeBatch,
    EdgeRecord,
    Emission,
    IngestResponse,
    OracleRequest,
    PlanNode,
    PlanRequest,
    PlanResponse,
    QueryModel,
    RegisterRequest,
    SessionConfig,
    StatsModel,
)
from graphwatch.engine import Engine, UnsupportedOperationError
from graphwatch.graph import TypeConflictError
from graphwatch.oracle import OracleBudgetError, oracle_emissions
from graphwatch.planner import build_sj_tree, decompose, render_tree
from graphwatch.query import QueryGraph, QueryValidationError, query_from_dict
from graphwatch.stats import GraphStatistics, collect_statistics
from graphwatch.streamio import edge_from_record


def _query(model: QueryModel) -> QueryGraph:
    try:
        return query_from_dict(model.model_dump())
    except QueryValidationError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def _stats(model: Optional[StatsModel]) -> GraphStatistics:
    if model is None:
        return GraphStatistics()
    try:
        return GraphStatistics.from_dict(model.model_dump())
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def _edges(records: list[EdgeRecord], first_key: int = 0):
    return [edge_from_record(r.model_dump(), first_key + i) for i, r in enumerate(records)]


class Session:
    """The service's engine. Requests are serialized by a lock; the engine itself is single-threaded."""

    def __init__(self, config: SessionConfig) -> None:
        self.config = config
        self.engine = Engine(max_leaf_size=config.max_leaf_size, expiry_stride=config.expiry_stride)
        self.next_key = 0
        self.lock = threading.Lock()


def plan_response(q: QueryGraph, stats: GraphStatistics, max_leaf_size: int) -> PlanResponse:
    plan = decompose(q, stats, max_leaf_size)
    tree = build_sj_tree(plan, q)
    nodes = [
        PlanNode(
            node=n.node_id,
            kind="root" if n.is_root else ("leaf" if n.is_leaf else "internal"),
            edges=sorted(n.edges),
            cut=sorted(n.cut_vertices),
            score=n.score,
        )
        for _, n in sorted(tree.nodes.items())
    ]
    return PlanResponse(
        query=q.name,
        leaves=[sorted(leaf) for leaf in plan.leaves],
        scores=list(plan.scores),
        nodes=nodes,
        text=render_tree(tree, q),
    )


def create_app(config: Optional[SessionConfig] = None) -> FastAPI:
    app = FastAPI(title="graphwatch", version="0.1.0")
    app.state.session = Session(config or SessionConfig())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/stats", response_model=StatsModel)
    def stats(batch: EdgeBatch) -> StatsModel:
        try:
            result = collect_statistics(_edges(batch.edges))
        except TypeConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return StatsModel(**result.to_dict())

    @app.post("/plan", response_model=PlanResponse)
    def plan(request: PlanRequest) -> PlanResponse:
        return plan_response(_query(request.query), _stats(request.stats), request.max_leaf_size)

    @app.post("/oracle", response_model=list[Emission])
    def oracle(request: OracleRequest) -> list[dict]:
        q = _query(request.query)
        try:
            return oracle_emissions(_edges(request.edges), q)
        except OracleBudgetError as exc:
            raise HTTPException(status_code=413, detail=str(exc)) from None

    @app.post("/session/reset")
    def reset(config: SessionConfig) -> dict:
        app.state.session = Session(config)
        return {"status": "reset"}

    @app.post("/session/queries", response_model=PlanResponse, status_code=201)
    def register(request: RegisterRequest) -> PlanResponse:
        session: Session = app.state.session
        q = _query(request.query)
        stats = _stats(request.stats)
        with session.lock:
            try:
                session.engine.register_query(q, stats)
            except UnsupportedOperationError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            except ValueError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
        return plan_response(q, stats, session.config.max_leaf_size)

    @app.get("/session/queries")
    def list_queries() -> list[dict]:
        session: Session = app.state.session
        return [
            {"name": rt.query.name, "window_ms": rt.window_ms, "leaves": [sorted(x) for x in rt.plan.leaves]}
            for rt in session.engine.runtimes
        ]

    @app.post("/session/edges", response_model=IngestResponse)
    def ingest(batch: EdgeBatch) -> IngestResponse:
        session: Session = app.state.session
        with session.lock:
            emissions = []
            accepted = 0
            for record in batch.edges:
                edge = edge_from_record(record.model_dump(), session.next_key)
                try:
                    found = session.engine.process_edge(edge)
                except TypeConflictError as exc:
                    raise HTTPException(
                        status_code=409,
                        detail=f"edge {edge.edge_key}: {exc}; {accepted} earlier edges of this batch were applied",
                    ) from None
                session.next_key += 1
                accepted += 1
                emissions.extend(m.to_dict() for m in found)
        return IngestResponse(accepted=accepted, emissions=emissions)

    @app.get("/session/summary")
    def summary() -> dict:
        return app.state.session.engine.summary()

    @app.get("/session/tree")
    def tree() -> dict:
        engine = app.state.session.engine
        return {rt.query.name: rt.tree.dump() for rt in engine.runtimes}

    return app


app = create_app()

"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 input validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from typing import Optional, Sequence

from graphwatch.engine import Engine
from graphwatch.graph import TypeConflictError
from graphwatch.oracle import OracleBudgetError, oracle_emissions
from graphwatch.planner import build_sj_tree, decompose, render_tree
from graphwatch.query import QueryGraph, QueryValidationError, load_query
from graphwatch.stats import GraphStatistics, collect_statistics, load_statistics, save_statistics
from graphwatch.streamio import StreamFormatError, emission_line, iter_edges, write_edges
from graphwatch.synth import corpus_queries, random_stream

log = logging.getLogger("graphwatch")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _load_query(path: str) -> QueryGraph:
    try:
        return load_query(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except QueryValidationError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_stats(path: Optional[str]) -> GraphStatistics:
    if path is None:
        log.warning("no statistics file; planning with cold-start frequencies")
        return GraphStatistics()
    if not os.path.exists(path):
        log.warning("statistics file %s not found; planning with cold-start frequencies", path)
        return GraphStatistics()
    try:
        return load_statistics(path)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _window_overrides(values: Sequence[str]) -> tuple[Optional[int], dict[str, int]]:
    """``--window-ms 500`` applies to all queries, ``--window-ms name=500`` to one."""
    default = None
    per_query: dict[str, int] = {}
    for raw in values:
        name, sep, number = raw.rpartition("=")
        try:
            value = int(number)
        except ValueError:
            raise InputError(f"--window-ms expects N or NAME=N, got {raw!r}") from None
        if value <= 0:
            raise InputError(f"--window-ms must be positive, got {raw!r}")
        if sep:
            per_query[name] = value
        else:
            default = value
    return default, per_query


def _open_stream(path: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def cmd_stats(args: argparse.Namespace) -> int:
    with _open_stream(args.stream) as fh:
        try:
            stats = collect_statistics(iter_edges(fh))
        except StreamFormatError as exc:
            raise InputError(f"{args.stream}: {exc}") from None
        except TypeConflictError as exc:
            raise InputError(f"{args.stream}: {exc}") from None
    save_statistics(stats, args.out)
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    q = _load_query(args.query)
    stats = _load_stats(args.stats)
    plan = decompose(q, stats, args.max_leaf_size)
    sys.stdout.write(render_tree(build_sj_tree(plan, q), q))
    return EXIT_OK


def _build_engine(args: argparse.Namespace) -> Engine:
    default_window, per_query = _window_overrides(args.window_ms or [])
    stats = _load_stats(args.stats)
    engine = Engine(max_leaf_size=args.max_leaf_size, expiry_stride=args.expiry_stride)
    for path in args.query:
        q = _load_query(path)
        window = per_query.pop(q.name, default_window)
        if window is not None:
            q = q.with_window(window)
        try:
            engine.register_query(q, stats)
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
    if per_query:
        raise InputError(f"--window-ms names unknown queries: {sorted(per_query)}")
    return engine


def _drive(engine: Engine, stream_path: str, sink) -> None:
    with _open_stream(stream_path) as fh:
        try:
            for edge in iter_edges(fh):
                try:
                    emitted = engine.process_edge(edge)
                except TypeConflictError as exc:
                    raise StreamFormatError(edge.edge_key + 1, str(exc)) from None
                if sink is not None:
                    for m in emitted:
                        sink.write(emission_line(m.to_dict()))
        except StreamFormatError as exc:
            raise InputError(f"{stream_path}: {exc}") from None


def cmd_run(args: argparse.Namespace) -> int:
    engine = _build_engine(args)
    started = time.perf_counter()
    with open(args.out, "w", encoding="utf-8") as out:
        try:
            _drive(engine, args.stream, out)
        except InputError as exc:
            out.write(emission_line({"error": str(exc), "partial": True}))
            raise
        engine.expire()
    elapsed = time.perf_counter() - started
    report = engine.summary()
    report["wall_seconds"] = round(elapsed, 6)
    report["edges_per_second"] = round(engine.edges_processed / elapsed, 1) if elapsed > 0 else None
    sys.stderr.write(json.dumps(report, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_dump_tree(args: argparse.Namespace) -> int:
    engine = _build_engine(args)
    if args.stream:
        _drive(engine, args.stream, None)
    dump = {rt.query.name: rt.tree.dump() for rt in engine.runtimes}
    text = json.dumps(dump, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    q = _load_query(args.query)
    default_window, per_query = _window_overrides(args.window_ms or [])
    window = per_query.get(q.name, default_window)
    if window is not None:
        q = q.with_window(window)
    with _open_stream(args.stream) as fh:
        try:
            stream = list(iter_edges(fh))
        except StreamFormatError as exc:
            raise InputError(f"{args.stream}: {exc}") from None
    try:
        rows = oracle_emissions(stream, q)
    except OracleBudgetError as exc:
        raise InputError(str(exc)) from None
    with open(args.out, "w", encoding="utf-8") as out:
        for row in rows:
            out.write(emission_line(row))
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    plant = corpus_queries() if args.plant else []
    stream = random_stream(
        args.seed, n_edges=args.edges, n_vertices=args.vertices, plant=plant, plant_count=args.plant_count
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        write_edges(stream, fh)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from graphwatch.api import create_app
    from graphwatch.api.schemas import SessionConfig

    app = create_app(SessionConfig(max_leaf_size=args.max_leaf_size, expiry_stride=args.expiry_stride))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _engine_flags(p: argparse.ArgumentParser, *, stream_required: bool = True) -> None:
    p.add_argument("--query", action="append", required=True, help="query file (repeatable)")
    p.add_argument("--stream", required=stream_required)
    p.add_argument("--stats")
    p.add_argument("--max-leaf-size", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--expiry-stride", type=int, default=1024)
    p.add_argument("--window-ms", action="append", metavar="[NAME=]MS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphwatch", description="Continuous subgraph queries over edge streams.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="collect summary statistics from a stream")
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plan", help="print the join tree for a query")
    p.add_argument("--query", required=True)
    p.add_argument("--stats")
    p.add_argument("--max-leaf-size", type=int, default=2, choices=(1, 2, 3))
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="stream a file through registered queries")
    _engine_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="brute-force matches for small inputs")
    p.add_argument("--query", required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window-ms", action="append", metavar="[NAME=]MS")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dump-tree", help="per-node match-table sizes and counters as JSON")
    _engine_flags(p, stream_required=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_tree)

    p = sub.add_parser("generate", help="write a seeded synthetic stream")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--edges", type=int, default=300)
    p.add_argument("--vertices", type=int, default=40)
    p.add_argument("--plant", action="store_true", help="plant instances of the built-in query corpus")
    p.add_argument("--plant-count", type=int, default=2)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--max-leaf-size", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--expiry-stride", type=int, default=1024)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "expiry_stride", 1) < 1:
        sys.stderr.write("error: --expiry-stride must be >= 1\n")
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort exit code mapping
        log.debug("unhandled error", exc_info=True)
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

from __future__ import annotations

from pathlib import Path

import pytest

from graphwatch.graph import TimestampedEdge, VertexRef

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def mk_edge(
    src: str,
    dst: str,
    etype: str = "x",
    t: int = 0,
    key: int = 0,
    src_type: str = "Host",
    dst_type: str = "Host",
) -> TimestampedEdge:
    return TimestampedEdge(VertexRef(src, src_type), VertexRef(dst, dst_type), etype, t, key)


def mk_stream(rows, vertex_type: str = "Host") -> list[TimestampedEdge]:
    """Rows of (src, etype, dst, t); edge_key is the row index."""
    return [mk_edge(s, d, et, t, i, vertex_type, vertex_type) for i, (s, et, d, t) in enumerate(rows)]


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for criterion in sorted(results):
            terminalreporter.write_line(results[criterion])

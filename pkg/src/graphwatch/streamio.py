"""Newline-delimited JSON edge streams and match emissions."""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from typing import IO, Any

from graphwatch.graph import TimestampedEdge, VertexRef

REQUIRED_KEYS = ("t", "src", "src_type", "dst", "dst_type", "etype")


class StreamFormatError(ValueError):
    """A stream line is not a valid edge record."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def edge_from_record(record: Any, edge_key: int) -> TimestampedEdge:
    """Build an edge from a decoded record. Raises ValueError on bad fields."""
    if not isinstance(record, dict):
        raise ValueError("record must be a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in record]
    if missing:
        raise ValueError(f"missing keys {missing}")
    t = record["t"]
    if isinstance(t, bool) or not isinstance(t, int) or t < 0:
        raise ValueError(f"'t' must be a non-negative integer, got {t!r}")
    for key in ("src", "src_type", "dst", "dst_type", "etype"):
        if not isinstance(record[key], str) or not record[key]:
            raise ValueError(f"{key!r} must be a non-empty string")
    attrs = record.get("attrs") or {}
    if not isinstance(attrs, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in attrs.items()
    ):
        raise ValueError("'attrs' must be a string-to-string map")
    return TimestampedEdge(
        source=VertexRef(record["src"], record["src_type"]),
        target=VertexRef(record["dst"], record["dst_type"]),
        edge_type=record["etype"],
        timestamp=t,
        edge_key=edge_key,
        attributes=attrs,
    )


def edge_to_record(edge: TimestampedEdge) -> dict[str, Any]:
    record: dict[str, Any] = {
        "t": edge.timestamp,
        "src": edge.src,
        "src_type": edge.source.type_label,
        "dst": edge.dst,
        "dst_type": edge.target.type_label,
        "etype": edge.edge_type,
    }
    if edge.attributes:
        record["attrs"] = dict(edge.attributes)
    return record


def iter_edges(lines: Iterable[str]) -> Iterator[TimestampedEdge]:
    """Parse stream lines. ``edge_key`` is the 0-based line ordinal; blank lines are skipped.

    Errors carry 1-based line numbers.
    """
    for ordinal, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            yield edge_from_record(record, ordinal)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(ordinal + 1, f"invalid JSON: {exc.msg}") from None
        except ValueError as exc:
            raise StreamFormatError(ordinal + 1, str(exc)) from None


def read_edges(path: str) -> list[TimestampedEdge]:
    with open(path, encoding="utf-8") as fh:
        return list(iter_edges(fh))


def write_edges(edges: Iterable[TimestampedEdge], fh: IO[str]) -> None:
    for edge in edges:
        fh.write(json.dumps(edge_to_record(edge), separators=(",", ":")) + "\n")


def emission_line(payload: dict[str, Any]) -> str:
    """Canonical one-line encoding; identical payloads give identical bytes."""
    return json.dumps(payload, separators=(",", ":"), sort_keys=False) + "\n"

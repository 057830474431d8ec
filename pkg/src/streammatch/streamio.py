"""Edge-stream text files and JSON-lines traces.

Edge stream: one ``u v w`` per line, whitespace separated; ``#`` starts a
comment; an optional ``n <count>`` header may precede the first edge.

Trace: a header object (``"kind": "header"``) followed by one event per line.
Vertex ids in both files are the raw external ids.
"""

from __future__ import annotations

import json
import math
from typing import IO, Iterable, Iterator, Optional, Sequence

from .core import EVICTED, PUSHED, SKIPPED, EdgeRecord, RemapTable, TraceEvent


class StreamFormatError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EdgeReader:
    """Iterates raw edges from a text stream; ``n`` is filled from the header."""

    def __init__(self, fh: IO[str]) -> None:
        self.fh = fh
        self.n: Optional[int] = None

    def __iter__(self) -> Iterator[EdgeRecord]:
        seen_edge = False
        for lineno, line in enumerate(self.fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if parts[0] == "n":
                if seen_edge or self.n is not None or len(parts) != 2:
                    raise StreamFormatError(lineno, "header 'n <count>' must come once, before any edge")
                try:
                    self.n = int(parts[1])
                except ValueError:
                    raise StreamFormatError(lineno, f"bad vertex count {parts[1]!r}") from None
                if self.n < 0:
                    raise StreamFormatError(lineno, "vertex count must be non-negative")
                continue
            if len(parts) != 3:
                raise StreamFormatError(lineno, f"expected 'u v w', got {body!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2])
            except ValueError:
                raise StreamFormatError(lineno, f"cannot parse {body!r}") from None
            if u < 0 or v < 0:
                raise StreamFormatError(lineno, "vertex ids must be non-negative")
            if not (w > 0 and math.isfinite(w)):
                raise StreamFormatError(lineno, f"weight must be positive and finite, got {parts[2]}")
            seen_edge = True
            yield EdgeRecord(u, v, w)


def read_edges(fh: IO[str]) -> list[EdgeRecord]:
    return list(EdgeReader(fh))


def format_weight(w: float) -> str:
    return repr(float(w))


def write_edges(fh: IO[str], edges: Iterable[EdgeRecord], n: Optional[int] = None) -> None:
    if n is not None:
        fh.write(f"n {n}\n")
    for u, v, w in edges:
        fh.write(f"{u} {v} {format_weight(w)}\n")


def remap_edges(edges: Iterable[EdgeRecord], table: RemapTable) -> Iterator[EdgeRecord]:
    for u, v, w in edges:
        yield EdgeRecord(table.remap(u), table.remap(v), w)


def event_to_json(ev: TraceEvent, table: Optional[RemapTable] = None) -> dict:
    u, v, w = ev.edge
    if table is not None:
        u, v = table.raw(u), table.raw(v)
    out = {"seq": ev.seq, "pos": ev.pos, "u": u, "v": v, "w": w, "decision": ev.decision}
    if ev.decision == PUSHED:
        out["leftover"] = ev.leftover
        out["phi_u_before"] = ev.phi_u_before
        out["phi_v_before"] = ev.phi_v_before
    elif ev.decision == EVICTED:
        out["evictor"] = ev.evictor
    return out


def event_from_json(obj: dict) -> TraceEvent:
    decision = obj["decision"]
    if decision not in (SKIPPED, PUSHED, EVICTED):
        raise ValueError(f"unknown decision {decision!r}")
    return TraceEvent(
        seq=obj["seq"],
        pos=obj["pos"],
        edge=EdgeRecord(obj["u"], obj["v"], obj["w"]),
        decision=decision,
        leftover=obj.get("leftover"),
        phi_u_before=obj.get("phi_u_before"),
        phi_v_before=obj.get("phi_v_before"),
        evictor=obj.get("evictor"),
    )


def write_trace(fh: IO[str], header: dict, trace: Sequence[TraceEvent], table: Optional[RemapTable] = None) -> None:
    fh.write(json.dumps({"kind": "header", **header}, sort_keys=True) + "\n")
    for ev in trace:
        fh.write(json.dumps(event_to_json(ev, table), sort_keys=True) + "\n")


def read_trace(fh: IO[str]) -> tuple[dict, list[TraceEvent]]:
    header: Optional[dict] = None
    events = []
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(lineno, f"bad JSON: {exc.msg}") from None
        if obj.get("kind") == "header":
            if header is not None or events:
                raise StreamFormatError(lineno, "header must be the first line")
            header = obj
            continue
        try:
            events.append(event_from_json(obj))
        except (KeyError, ValueError) as exc:
            raise StreamFormatError(lineno, f"bad trace event: {exc}") from None
    if header is None:
        raise StreamFormatError(1, "missing trace header")
    prev = -1
    for ev in events:
        if ev.seq <= prev:
            raise StreamFormatError(0, "trace sequence numbers must increase")
        prev = ev.seq
    return header, events

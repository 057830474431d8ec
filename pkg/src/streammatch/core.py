"""Value types shared by the engine, the verifiers and the oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

# Relative tolerance for every float inequality in verification.
TAU = 1e-9

VertexId = int


class EdgeRecord(NamedTuple):
    """One stream item: an undirected edge {u, v} with positive weight."""

    u: VertexId
    v: VertexId
    w: float


class RemapTable:
    """Injective map from raw (external) vertex ids to dense indices 0..k-1."""

    def __init__(self) -> None:
        self._index: dict[int, VertexId] = {}
        self._raw: list[int] = []

    def __len__(self) -> int:
        return len(self._raw)

    def __contains__(self, raw_id: int) -> bool:
        return raw_id in self._index

    def raw(self, vid: VertexId) -> int:
        return self._raw[vid]

    def remap(self, raw_id: int) -> VertexId:
        return remap_vertex(raw_id, self)


def remap_vertex(raw_id: int, table: RemapTable) -> VertexId:
    """Return the dense index for ``raw_id``, allocating the next one if new."""
    if raw_id < 0:
        raise ValueError(f"vertex id must be non-negative, got {raw_id}")
    vid = table._index.get(raw_id)
    if vid is None:
        vid = len(table._raw)
        table._index[raw_id] = vid
        table._raw.append(raw_id)
    return vid


@dataclass
class Matching:
    edges: list[EdgeRecord] = field(default_factory=list)
    total_weight: float = 0.0

    @classmethod
    def from_edges(cls, edges: Iterable[EdgeRecord]) -> "Matching":
        edges = list(edges)
        return cls(edges, math.fsum(e.w for e in edges))

    def __len__(self) -> int:
        return len(self.edges)

    def is_valid(self) -> bool:
        seen: set[VertexId] = set()
        for e in self.edges:
            if e.u == e.v or e.u in seen or e.v in seen:
                return False
            seen.add(e.u)
            seen.add(e.v)
        expected = math.fsum(e.w for e in self.edges)
        return math.isclose(self.total_weight, expected, rel_tol=TAU, abs_tol=TAU)


@dataclass
class StreamStats:
    edges_seen: int = 0
    edges_pushed: int = 0
    edges_skipped: int = 0
    edges_evicted: int = 0
    self_loops_rejected: int = 0
    edges_dropped: int = 0
    peak_stack_size: int = 0
    peak_queue_size: int = 0
    per_vertex_push_counts: dict[VertexId, int] = field(default_factory=dict)
    w_max_seen: float = 0.0
    w_min_pushed: float = math.inf
    n_seen: int = 0

    def check(self, final_stack_size: int) -> list[str]:
        """Return the violated bookkeeping invariants (empty when consistent)."""
        problems = []
        if self.edges_seen != self.edges_pushed + self.edges_skipped:
            problems.append("edges_seen != edges_pushed + edges_skipped")
        if self.peak_stack_size < final_stack_size:
            problems.append("peak_stack_size < final stack size")
        if self.edges_evicted > self.edges_pushed:
            problems.append("edges_evicted > edges_pushed")
        return problems

    def to_dict(self) -> dict:
        return {
            "edges_seen": self.edges_seen,
            "edges_pushed": self.edges_pushed,
            "edges_skipped": self.edges_skipped,
            "edges_evicted": self.edges_evicted,
            "self_loops_rejected": self.self_loops_rejected,
            "edges_dropped": self.edges_dropped,
            "peak_stack_size": self.peak_stack_size,
            "peak_queue_size": self.peak_queue_size,
            "max_pushes_per_vertex": max(self.per_vertex_push_counts.values(), default=0),
            "w_max_seen": self.w_max_seen,
            "w_min_pushed": None if math.isinf(self.w_min_pushed) else self.w_min_pushed,
            "n_seen": self.n_seen,
        }


SKIPPED = "skipped"
PUSHED = "pushed"
EVICTED = "evicted"


@dataclass(frozen=True)
class TraceEvent:
    """Per-edge decision record.

    ``pos`` is the position of the edge among the edges the engine processed.
    For an eviction, ``edge``/``pos`` name the victim and ``evictor`` is the
    position of the pushed edge that overflowed the queue.
    """

    seq: int
    pos: int
    edge: EdgeRecord
    decision: str
    leftover: Optional[float] = None
    phi_u_before: Optional[float] = None
    phi_v_before: Optional[float] = None
    evictor: Optional[int] = None

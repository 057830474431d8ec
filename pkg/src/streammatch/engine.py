"""One-pass local-ratio matching engine.

Three modes share one code path:

* ``basic``  -- potentials without the (1+eps) slack (eps = 0), unbounded stack;
* ``exp``    -- skip an edge unless it beats (1+eps) times its endpoint potentials;
* ``capped`` -- ``exp`` plus a FIFO of capacity beta per vertex; overflowing a
  queue evicts its oldest edge from the stack.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .certificate import DualCertificate
from .core import (
    EVICTED,
    PUSHED,
    SKIPPED,
    EdgeRecord,
    Matching,
    StreamStats,
    TraceEvent,
)

log = logging.getLogger(__name__)

MODES = ("basic", "exp", "capped")


def default_beta(epsilon: float) -> int:
    """Per-vertex queue capacity ``ceil(3 ln(1/eps) / eps) + 1``."""
    if not 0 < epsilon <= 1:
        raise ValueError(f"beta is defined for 0 < epsilon <= 1, got {epsilon}")
    return math.ceil(3 * math.log(1 / epsilon) / epsilon) + 1


@dataclass(frozen=True)
class EngineConfig:
    epsilon: float = 0.0
    mode: str = "exp"
    beta_override: Optional[int] = None
    trace_enabled: bool = False
    phi_backend: str = "dense"
    # vertex-count bound; sizes the compact window
    n_bound: Optional[int] = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "basic" and self.epsilon != 0:
            # basic is exp with eps forced to zero
            object.__setattr__(self, "epsilon", 0.0)
        if self.mode == "exp" and not self.epsilon > 0:
            raise ValueError("mode=exp requires epsilon > 0")
        if self.mode == "capped" and not 0 < self.epsilon <= 0.25:
            raise ValueError("mode=capped requires 0 < epsilon <= 1/4")
        if self.beta_override is not None and self.beta_override < 1:
            raise ValueError("beta must be a positive integer")
        if self.phi_backend not in ("dense", "compact"):
            raise ValueError(f"unknown phi backend {self.phi_backend!r}")
        if self.phi_backend == "compact" and self.epsilon <= 0:
            raise ValueError("the compact phi backend needs epsilon > 0")

    @property
    def beta(self) -> Optional[int]:
        if self.mode != "capped":
            return None
        if self.beta_override is not None:
            return self.beta_override
        return default_beta(self.epsilon)


class _Entry:
    __slots__ = ("edge", "pos", "out", "leftover", "alive")

    def __init__(self, edge: EdgeRecord, pos: int, out: EdgeRecord, leftover: float) -> None:
        self.edge = edge
        self.pos = pos
        self.out = out
        self.leftover = leftover
        self.alive = True


class LazyStack:
    """Stack supporting removal of a known element in O(1) amortized.

    Removed entries are tombstoned and the backing list is compacted (order
    preserved) once tombstones outnumber live entries.
    """

    def __init__(self) -> None:
        self._items: list[_Entry] = []
        self._dead = 0
        self.moves = 0

    def __len__(self) -> int:
        return len(self._items) - self._dead

    def push(self, entry: _Entry) -> None:
        self._items.append(entry)

    def remove(self, entry: _Entry) -> None:
        if not entry.alive:
            raise ValueError("entry already removed")
        entry.alive = False
        self._dead += 1
        if self._dead * 2 > len(self._items):
            self.moves += len(self._items)
            self._items = [x for x in self._items if x.alive]
            self._dead = 0

    def __iter__(self) -> Iterator[_Entry]:
        return (x for x in self._items if x.alive)

    def pop_all(self) -> Iterator[_Entry]:
        """Yield live entries last-pushed first, emptying the stack."""
        items, self._items, self._dead = self._items, [], 0
        for entry in reversed(items):
            if entry.alive:
                yield entry


class DensePhi:
    """Plain list of potentials, grown on demand."""

    def __init__(self) -> None:
        self.values: list[float] = []

    def ensure(self, v: int) -> None:
        if v >= len(self.values):
            self.values.extend([0.0] * (v + 1 - len(self.values)))

    def get(self, v: int) -> float:
        return self.values[v] if v < len(self.values) else 0.0

    def add(self, v: int, amount: float) -> None:
        self.values[v] += amount

    def observe_weight(self, w: float) -> None:
        pass

    def snapshot(self) -> list[float]:
        return list(self.values)


@dataclass
class RunResult:
    matching: Matching
    certificate: DualCertificate
    stats: StreamStats
    trace: Optional[list[TraceEvent]] = None
    # compact backend only: exact potentials kept alongside the compact ones
    shadow_phi: Optional[list[float]] = None
    phi_store: object = field(default=None, repr=False)
    # the same matching with the weights the engine saw (rounded when quantizing)
    engine_matching: Optional[Matching] = None


class StreamEngine:
    def __init__(self, cfg: EngineConfig) -> None:
        self.cfg = cfg
        self.eps = cfg.epsilon
        self.beta = cfg.beta
        self.stack = LazyStack()
        self.stats = StreamStats()
        self.trace: Optional[list[TraceEvent]] = [] if cfg.trace_enabled else None
        self.queues: list[deque] = []
        self.ops = 0
        self._pos = 0
        self._finalized = False
        if cfg.phi_backend == "compact":
            from .compaction import CompactPhi

            self.phi = CompactPhi(cfg.epsilon, n_bound=cfg.n_bound)
            self.shadow: Optional[list[float]] = []
        else:
            self.phi = DensePhi()
            self.shadow = None

    def _ensure(self, v: int) -> None:
        if v < self.stats.n_seen:
            return
        self.phi.ensure(v)
        if self.shadow is not None and v >= len(self.shadow):
            self.shadow.extend([0.0] * (v + 1 - len(self.shadow)))
        if self.beta is not None and v >= len(self.queues):
            self.queues.extend(deque() for _ in range(v + 1 - len(self.queues)))
        if v >= self.stats.n_seen:
            self.stats.n_seen = v + 1

    def _log(self, pos: int, edge: EdgeRecord, decision: str, **kw) -> None:
        self.trace.append(TraceEvent(len(self.trace), pos, edge, decision, **kw))

    def process_edge(self, e: EdgeRecord, original: Optional[EdgeRecord] = None) -> str:
        """Feed one edge; returns ``"pushed"`` or ``"skipped"``."""
        if self._finalized:
            raise RuntimeError("engine already finalized")
        u, v, w = e
        if u == v:
            raise ValueError("self-loops must be filtered before the engine")
        if not w > 0:
            raise ValueError(f"edge weight must be positive, got {w}")
        stats = self.stats
        if u >= stats.n_seen or v >= stats.n_seen:
            self._ensure(u)
            self._ensure(v)
        pos = self._pos
        self._pos += 1
        stats.edges_seen += 1
        self.ops += 1
        if w > stats.w_max_seen:
            stats.w_max_seen = w
        self.phi.observe_weight(w)

        phi = self.phi
        pu = phi.get(u)
        pv = phi.get(v)
        leftover = w - (pu + pv)
        # with eps = 0 a tie leaves nothing positive to push
        if w < (1 + self.eps) * (pu + pv) or leftover <= 0:
            stats.edges_skipped += 1
            if self.trace is not None:
                self._log(pos, e, SKIPPED)
            return SKIPPED

        phi.add(u, leftover)
        phi.add(v, leftover)
        if self.shadow is not None:
            self.shadow[u] += leftover
            self.shadow[v] += leftover
        entry = _Entry(e, pos, original if original is not None else e, leftover)
        self.stack.push(entry)
        stats.edges_pushed += 1
        counts = stats.per_vertex_push_counts
        counts[u] = counts.get(u, 0) + 1
        counts[v] = counts.get(v, 0) + 1
        if w < stats.w_min_pushed:
            stats.w_min_pushed = w
        if self.trace is not None:
            self._log(pos, e, PUSHED, leftover=leftover, phi_u_before=pu, phi_v_before=pv)

        if self.beta is not None:
            for x in (u, v):
                q = self.queues[x]
                q.append(entry)
                self.ops += 1
                if len(q) > self.beta:
                    victim = q.popleft()
                    self.ops += 1
                    # a victim already removed through its other endpoint is stale
                    if victim.alive:
                        self.stack.remove(victim)
                        stats.edges_evicted += 1
                        if self.trace is not None:
                            self._log(victim.pos, victim.edge, EVICTED, evictor=pos)
                if len(q) > stats.peak_queue_size:
                    stats.peak_queue_size = len(q)
        live = len(self.stack)
        if live > stats.peak_stack_size:
            stats.peak_stack_size = live
        return PUSHED

    def certificate(self) -> DualCertificate:
        return DualCertificate.from_phi(self.phi.snapshot(), self.eps)

    def finalize(self) -> Matching:
        """Unwind the stack greedily; the engine cannot be used afterwards."""
        if self._finalized:
            raise RuntimeError("finalize() called twice")
        self._finalized = True
        matched: set[int] = set()
        edges = []
        seen = []
        for entry in self.stack.pop_all():
            self.ops += 1
            u, v, _ = entry.edge
            if u in matched or v in matched:
                continue
            matched.add(u)
            matched.add(v)
            edges.append(entry.out)
            seen.append(entry.edge)
        self.ops += self.stack.moves
        self.engine_matching = Matching.from_edges(seen)
        return Matching.from_edges(edges)


def process_edge(engine: StreamEngine, e: EdgeRecord) -> str:
    return engine.process_edge(e)


def finalize(engine: StreamEngine) -> Matching:
    return engine.finalize()


def run_stream(edges: Iterable[EdgeRecord], cfg: EngineConfig) -> RunResult:
    """Single pass over ``edges``; self-loops are counted and dropped."""
    engine = StreamEngine(cfg)
    loops = 0
    for e in edges:
        if e.u == e.v:
            loops += 1
            continue
        engine.process_edge(e)
    if loops:
        log.warning("rejected %d self-loop(s)", loops)
    return collect_result(engine, loops)


def collect_result(engine: StreamEngine, loops: int = 0, dropped: int = 0) -> RunResult:
    cert = engine.certificate()
    engine.stats.self_loops_rejected = loops
    engine.stats.edges_dropped = dropped
    matching = engine.finalize()
    return RunResult(
        matching=matching,
        certificate=cert,
        stats=engine.stats,
        trace=engine.trace,
        shadow_phi=engine.shadow,
        phi_store=engine.phi,
        engine_matching=engine.engine_matching,
    )

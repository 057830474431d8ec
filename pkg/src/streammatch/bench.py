"""Throughput and space measurements over generated streams."""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .engine import EngineConfig, run_stream
from .oracle import StreamSpec, generate_stream


@dataclass
class BenchRow:
    model: str
    edges: int
    n: int
    mode: str
    epsilon: float
    beta: Optional[int]
    seconds: float
    ns_per_edge: float
    edges_per_second: float
    peak_stack_size: int
    peak_queue_size: int
    edges_pushed: int
    edges_evicted: int
    max_pushes_per_vertex: int
    matching_weight: float
    space_bound: Optional[int]
    space_ok: Optional[bool]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _cells(modes: Sequence[str], epsilons: Sequence[float]) -> list[tuple[str, float]]:
    cells = []
    for mode in modes:
        if mode == "basic":
            cells.append(("basic", 0.0))
            continue
        for eps in epsilons:
            if mode == "capped" and eps > 0.25:
                continue
            cells.append((mode, eps))
    return cells


def sized_spec(base: StreamSpec, m: int, density: float) -> StreamSpec:
    """Spec with ``m`` edges on about ``m / density`` vertices."""
    n = max(4, int(round(m / density)))
    while n * (n - 1) // 2 < m:
        n += 1
    return replace(base, n=n, m=m)


def time_run(edges: Sequence, cfg: EngineConfig, repeats: int = 1):
    """Best-of-``repeats`` wall clock for one full run (pass + unwind).

    The cyclic garbage collector is paused while timing, as ``timeit`` does:
    its pauses scale with the size of the live heap, not with engine work.
    """
    best = None
    result = None
    for _ in range(max(1, repeats)):
        result = None
        gc.collect()
        was_enabled = gc.isenabled()
        gc.disable()
        try:
            t0 = time.perf_counter()
            result = run_stream(edges, cfg)
            dt = time.perf_counter() - t0
        finally:
            if was_enabled:
                gc.enable()
        best = dt if best is None else min(best, dt)
    return best, result


def run_bench(
    base: StreamSpec,
    sizes: Iterable[int],
    modes: Sequence[str] = ("exp", "capped"),
    epsilons: Sequence[float] = (0.25,),
    density: float = 8.0,
    repeats: int = 1,
) -> list[BenchRow]:
    rows = []
    for m in sizes:
        spec = sized_spec(base, m, density) if base.model == "gnm_random" else replace(base, m=m)
        edges = generate_stream(spec)
        n_seen = 1 + max((max(e.u, e.v) for e in edges), default=-1)
        for mode, eps in _cells(modes, epsilons):
            cfg = EngineConfig(epsilon=eps, mode=mode)
            seconds, res = time_run(edges, cfg, repeats)
            stats = res.stats
            bound = n_seen * cfg.beta if cfg.beta is not None else None
            count = max(len(edges), 1)
            rows.append(
                BenchRow(
                    model=spec.model,
                    edges=len(edges),
                    n=n_seen,
                    mode=mode,
                    epsilon=eps,
                    beta=cfg.beta,
                    seconds=seconds,
                    ns_per_edge=seconds * 1e9 / count,
                    edges_per_second=count / seconds if seconds > 0 else float("inf"),
                    peak_stack_size=stats.peak_stack_size,
                    peak_queue_size=stats.peak_queue_size,
                    edges_pushed=stats.edges_pushed,
                    edges_evicted=stats.edges_evicted,
                    max_pushes_per_vertex=max(stats.per_vertex_push_counts.values(), default=0),
                    matching_weight=res.matching.total_weight,
                    space_bound=bound,
                    space_ok=None if bound is None else stats.peak_stack_size <= bound,
                )
            )
    return rows


def format_table(rows: Sequence[BenchRow]) -> str:
    header = f"{'model':<18} {'edges':>9} {'n':>8} {'mode':<7} {'eps':>7} {'beta':>5} " \
             f"{'ns/edge':>9} {'peak_stack':>10} {'evicted':>8} {'space_ok':>8}"
    lines = [header, "-" * len(header)]
    for r in rows:
        beta = "-" if r.beta is None else str(r.beta)
        ok = "-" if r.space_ok is None else ("yes" if r.space_ok else "NO")
        lines.append(
            f"{r.model:<18} {r.edges:>9} {r.n:>8} {r.mode:<7} {r.epsilon:>7.4g} {beta:>5} "
            f"{r.ns_per_edge:>9.0f} {r.peak_stack_size:>10} {r.edges_evicted:>8} {ok:>8}"
        )
    return "\n".join(lines)


def per_edge_spread(rows: Sequence[BenchRow], mode: str, epsilon: float) -> float:
    """max/min ns-per-edge over stream sizes for one (mode, eps) cell."""
    times = [r.ns_per_edge for r in rows if r.mode == mode and r.epsilon == epsilon]
    if not times:
        raise ValueError(f"no rows for mode={mode} eps={epsilon}")
    return max(times) / min(times)

"""Remap, filter, round and run: the path shared by the CLI and the harnesses."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .certificate import (
    CheckReport,
    DualCertificate,
    check_dual_feasible,
    check_trace_identity,
    verify_trace,
)
from .compaction import ThresholdFilter, compare_with_shadow
from .compaction import quantize as quantize_weight
from .core import EdgeRecord, Matching, RemapTable
from .engine import EngineConfig, RunResult, StreamEngine, collect_result

log = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    run: RunResult
    table: RemapTable
    # matching with the weights the engine saw (rounded when quantizing)
    engine_matching: Matching
    cfg: EngineConfig
    engine_edges: Optional[list[EdgeRecord]] = None
    threshold: Optional[ThresholdFilter] = None
    verification: list[CheckReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.verification)


def run_pipeline(
    raw_edges: Iterable[EdgeRecord],
    cfg: EngineConfig,
    quantize: bool = False,
    threshold_n: Optional[int] = None,
    keep_edges: bool = False,
    remap: bool = True,
) -> PipelineResult:
    """Run one engine over ``raw_edges``.

    Self-loops are counted and dropped. With ``keep_edges`` the edges the
    engine saw are buffered so the run can be verified afterwards.
    """
    if quantize and cfg.epsilon <= 0:
        raise ValueError("quantization needs epsilon > 0")
    table = RemapTable()
    threshold = ThresholdFilter(threshold_n, cfg.epsilon) if threshold_n is not None else None
    engine = StreamEngine(cfg)
    kept: Optional[list[EdgeRecord]] = [] if keep_edges else None
    loops = 0
    for e in raw_edges:
        if e.u == e.v:
            loops += 1
            continue
        if remap:
            e = EdgeRecord(table.remap(e.u), table.remap(e.v), e.w)
        if threshold is not None and not threshold(e):
            continue
        seen = EdgeRecord(e.u, e.v, quantize_weight(e.w, cfg.epsilon).value) if quantize else e
        if kept is not None:
            kept.append(seen)
        engine.process_edge(seen, e)
    if loops:
        log.warning("rejected %d self-loop(s)", loops)
    run = collect_result(engine, loops, threshold.dropped if threshold else 0)
    return PipelineResult(run, table, run.engine_matching, cfg, kept, threshold)


def verify_run(res: PipelineResult) -> list[CheckReport]:
    """Certificate and trace checks for a run made with ``keep_edges`` and tracing."""
    run = res.run
    cfg_eps = run.certificate.epsilon
    if res.engine_edges is None or run.trace is None:
        raise ValueError("verification needs buffered edges and a trace")
    if run.shadow_phi is not None:
        exact = DualCertificate.from_phi(run.shadow_phi, cfg_eps)
        cmp = compare_with_shadow(run.phi_store, run.shadow_phi)
        shadow = CheckReport("compact_shadow", ok=cmp.ok, worst_slack=-cmp.worst_excess, checked=cmp.checked)
        reports = [
            check_dual_feasible(exact, res.engine_edges),
            check_trace_identity(run.trace, exact),
            shadow,
        ]
    else:
        capped = res.cfg.mode == "capped"
        reports = verify_trace(
            run.trace, res.engine_edges, cfg_eps, capped, res.engine_matching.total_weight
        )
        # the engine's own certificate, not only the one rebuilt from the trace
        reports[0] = check_dual_feasible(run.certificate, res.engine_edges)
        reports[4] = check_trace_identity(run.trace, run.certificate)
    res.verification = reports
    return reports

"""Dual certificates and trace-level verification.

Every check returns a :class:`CheckReport` instead of raising, so a failing
run can be inspected: the report keeps the worst relative slack seen (negative
means violated) and the first offending items.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import EVICTED, PUSHED, SKIPPED, TAU, EdgeRecord, TraceEvent

MAX_OFFENDERS = 20


@dataclass(frozen=True)
class DualCertificate:
    phi: tuple[float, ...]
    epsilon: float
    phi_sum: float

    @classmethod
    def from_phi(cls, phi: Sequence[float], epsilon: float) -> "DualCertificate":
        return cls(tuple(phi), epsilon, math.fsum(phi))

    def get(self, v: int) -> float:
        return self.phi[v] if v < len(self.phi) else 0.0

    def is_well_formed(self) -> bool:
        return all(x >= 0 for x in self.phi) and math.isclose(
            self.phi_sum, math.fsum(self.phi), rel_tol=TAU, abs_tol=TAU
        )


def upper_bound(cert: DualCertificate) -> float:
    """Bound on the weight of every matching of a stream certified by ``cert``."""
    return (1 + cert.epsilon) * cert.phi_sum


@dataclass
class CheckReport:
    name: str
    ok: bool = True
    worst_slack: float = math.inf
    checked: int = 0
    offending: list = field(default_factory=list)

    def record(self, slack: float, item=None) -> None:
        self.checked += 1
        if slack < self.worst_slack:
            self.worst_slack = slack
        if slack < 0:
            self.ok = False
            if len(self.offending) < MAX_OFFENDERS:
                self.offending.append(item)

    def fail(self, item) -> None:
        self.ok = False
        if len(self.offending) < MAX_OFFENDERS:
            self.offending.append(item)

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "pass": self.ok,
            "worst_slack": None if math.isinf(self.worst_slack) else self.worst_slack,
            "checked": self.checked,
            "offending": list(self.offending),
        }


def _rel(margin: float, scale: float) -> float:
    return margin / scale if scale > 0 else margin


def check_dual_feasible(
    cert: DualCertificate, edges: Iterable[EdgeRecord], tau: float = TAU
) -> CheckReport:
    """Every edge must satisfy ``w <= (1+eps)(phi_u + phi_v)``."""
    rep = CheckReport("dual_feasible")
    scale = 1 + cert.epsilon
    for i, e in enumerate(edges):
        if e.u == e.v:
            continue
        cover = scale * (cert.get(e.u) + cert.get(e.v))
        slack = _rel(cover - e.w, e.w) + tau
        rep.record(slack, {"pos": i, "u": e.u, "v": e.v, "w": e.w, "cover": cover})
    return rep


def phi_from_trace(trace: Iterable[TraceEvent]) -> list[float]:
    """Rebuild the final potentials as the sum of incident leftovers."""
    acc: dict[int, list[float]] = {}
    top = -1
    for ev in trace:
        if ev.decision != PUSHED:
            continue
        for x in (ev.edge.u, ev.edge.v):
            acc.setdefault(x, []).append(ev.leftover)
            top = max(top, x)
    return [math.fsum(acc.get(v, ())) for v in range(top + 1)]


def check_push_lemma(trace: Sequence[TraceEvent], tau: float = TAU) -> CheckReport:
    """For each pushed e, ``w_e >= sum of leftovers over P(e)``.

    P(e) is e together with every earlier pushed edge sharing an endpoint;
    an earlier parallel edge is counted once. The recorded potentials and
    leftover are also checked against the values rebuilt from the trace.
    """
    rep = CheckReport("push_lemma")
    incident: dict[int, float] = {}
    parallel: dict[tuple[int, int], float] = {}
    for ev in trace:
        if ev.decision != PUSHED:
            continue
        u, v, w = ev.edge
        key = (min(u, v), max(u, v))
        au = incident.get(u, 0.0)
        av = incident.get(v, 0.0)
        neighbours = au + av - parallel.get(key, 0.0)
        slack = _rel(w - (ev.leftover + neighbours), w) + tau
        item = {"pos": ev.pos, "u": u, "v": v, "w": w, "leftover": ev.leftover}
        rep.record(slack, item)
        # recorded state must agree with the rebuilt state
        for recorded, rebuilt in ((ev.phi_u_before, au), (ev.phi_v_before, av)):
            if abs(recorded - rebuilt) > tau * max(w, abs(rebuilt), 1.0):
                rep.record(-abs(recorded - rebuilt) / max(w, 1.0), {**item, "phi_mismatch": recorded - rebuilt})
        if abs(w - ev.phi_u_before - ev.phi_v_before - ev.leftover) > tau * w:
            rep.fail({**item, "leftover_mismatch": True})
        if not ev.leftover > 0:
            rep.fail({**item, "nonpositive_leftover": True})
        incident[u] = au + ev.leftover
        incident[v] = av + ev.leftover
        parallel[key] = parallel.get(key, 0.0) + ev.leftover
    return rep


def check_exponential_growth(trace: Sequence[TraceEvent], epsilon: float, tau: float = TAU) -> CheckReport:
    """A push raises each positive endpoint potential by a (1+eps) factor and
    leaves a leftover of at least eps times the endpoint potentials."""
    rep = CheckReport("exponential_growth")
    for ev in trace:
        if ev.decision != PUSHED:
            continue
        w = ev.edge.w
        item = {"pos": ev.pos, "leftover": ev.leftover}
        for before in (ev.phi_u_before, ev.phi_v_before):
            after = before + ev.leftover
            if before > 0:
                rep.record(_rel(after - (1 + epsilon) * before, after) + tau, item)
            else:
                rep.record(_rel(after, w), item)
        floor = epsilon * (ev.phi_u_before + ev.phi_v_before)
        rep.record(_rel(ev.leftover - floor, w) + tau, item)
    return rep


def _leftovers(trace: Iterable[TraceEvent]) -> dict[int, float]:
    return {ev.pos: ev.leftover for ev in trace if ev.decision == PUSHED}


def check_eviction_ratio(trace: Sequence[TraceEvent], epsilon: float, tau: float = TAU) -> CheckReport:
    """Every evictor's leftover is at least 1/eps times its victim's."""
    rep = CheckReport("eviction_ratio")
    left = _leftovers(trace)
    pushed_seen: set[int] = set()
    for ev in trace:
        if ev.decision == PUSHED:
            pushed_seen.add(ev.pos)
            continue
        if ev.decision != EVICTED:
            continue
        item = {"victim": ev.pos, "evictor": ev.evictor}
        if ev.pos not in pushed_seen or ev.evictor not in pushed_seen:
            rep.fail({**item, "order": "eviction before push"})
            continue
        need = left[ev.pos] / epsilon
        rep.record(_rel(left[ev.evictor] - need, need) + tau, item)
    return rep


@dataclass
class DiscardForest:
    """Kept edge position -> positions of the edges it discarded."""

    discarded: dict[int, list[int]]
    depth: int = 0

    def members(self, kept: int) -> list[int]:
        return self.discarded.get(kept, [])


def build_discard_forest(trace: Sequence[TraceEvent]) -> DiscardForest:
    """Resolve every eviction chain to the never-evicted edge that ends it."""
    evicted_by: dict[int, int] = {}
    for ev in trace:
        if ev.decision == EVICTED:
            if ev.pos in evicted_by:
                raise ValueError(f"edge at position {ev.pos} evicted twice")
            evicted_by[ev.pos] = ev.evictor
    root: dict[int, tuple[int, int]] = {}
    deepest = 0
    for victim in evicted_by:
        if victim in root:
            continue
        chain = [victim]
        cur = evicted_by[victim]
        while cur in evicted_by and cur not in root:
            chain.append(cur)
            cur = evicted_by[cur]
            if len(chain) > len(evicted_by):
                raise ValueError("eviction cycle")
        if cur in root:
            terminal, base = root[cur]
        else:
            terminal, base = cur, 0
        for k, x in enumerate(reversed(chain)):
            root[x] = (terminal, base + k + 1)
            deepest = max(deepest, base + k + 1)
    forest: dict[int, list[int]] = {}
    for victim in sorted(root):
        forest.setdefault(root[victim][0], []).append(victim)
    return DiscardForest(forest, deepest)


def check_discard_sums(
    forest: DiscardForest, trace: Sequence[TraceEvent], epsilon: float, tau: float = TAU
) -> CheckReport:
    """Each kept edge outweighs everything it discarded by a 1/(4 eps) factor."""
    rep = CheckReport("discard_sums")
    left = _leftovers(trace)
    for kept, members in forest.discarded.items():
        total = math.fsum(left[x] for x in members)
        cap = 4 * epsilon * left[kept]
        rep.record(_rel(cap - total, cap) + tau, {"kept": kept, "discarded": len(members), "sum": total, "cap": cap})
    return rep


def check_trace_identity(trace: Sequence[TraceEvent], cert: DualCertificate, tau: float = TAU) -> CheckReport:
    """Twice the summed leftovers equals the summed final potentials."""
    rep = CheckReport("trace_identity")
    lefts = [ev.leftover for ev in trace if ev.decision == PUSHED]
    total = 2 * math.fsum(lefts)
    allowed = tau * max(len(lefts), 1) * max(cert.phi_sum, 1.0)
    margin = (allowed - abs(total - cert.phi_sum)) / max(cert.phi_sum, 1.0)
    rep.record(margin, {"twice_leftovers": total, "phi_sum": cert.phi_sum})
    return rep


def check_composition(matching_weight: float, cert: DualCertificate, tau: float = TAU) -> CheckReport:
    """Capped runs: ``2 (1+4 eps) w(M) >= sum phi``."""
    rep = CheckReport("composition")
    lhs = 2 * (1 + 4 * cert.epsilon) * matching_weight
    rep.record(_rel(lhs - cert.phi_sum, cert.phi_sum) + tau, {"lhs": lhs, "phi_sum": cert.phi_sum})
    return rep


def check_skips(trace: Sequence[TraceEvent], epsilon: float, tau: float = TAU) -> CheckReport:
    """Skipped edges really were covered by the potentials at their arrival."""
    rep = CheckReport("skip_consistency")
    phi: dict[int, float] = {}
    for ev in trace:
        u, v, w = ev.edge
        if ev.decision == PUSHED:
            phi[u] = phi.get(u, 0.0) + ev.leftover
            phi[v] = phi.get(v, 0.0) + ev.leftover
        elif ev.decision == SKIPPED:
            cover = (1 + epsilon) * (phi.get(u, 0.0) + phi.get(v, 0.0))
            rep.record(_rel(cover - w, w) + tau, {"pos": ev.pos, "w": w, "cover": cover})
    return rep


def verify_trace(
    trace: Sequence[TraceEvent],
    edges: Sequence[EdgeRecord],
    epsilon: float,
    capped: bool,
    matching_weight: Optional[float] = None,
) -> list[CheckReport]:
    """Run every applicable check on one traced run."""
    cert = DualCertificate.from_phi(phi_from_trace(trace), epsilon)
    reports = [
        check_dual_feasible(cert, edges),
        check_push_lemma(trace),
        check_exponential_growth(trace, epsilon),
        check_skips(trace, epsilon),
        check_trace_identity(trace, cert),
    ]
    if capped:
        forest = build_discard_forest(trace)
        reports.append(check_eviction_ratio(trace, epsilon))
        reports.append(check_discard_sums(forest, trace, epsilon))
        if matching_weight is not None:
            reports.append(check_composition(matching_weight, cert))
    return reports

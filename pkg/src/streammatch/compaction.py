"""Weight-range reduction: geometric rounding, the small-edge filter, and a
bit-array store for the vertex potentials."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from .core import TAU, EdgeRecord

log = logging.getLogger(__name__)

DEFAULT_N_BOUND = 1024


class DistinctnessError(ValueError):
    """A bit of one vertex's potential was set twice."""


class QuantizedWeight(NamedTuple):
    exponent: int
    epsilon: float

    @property
    def value(self) -> float:
        return (1 + self.epsilon) ** self.exponent


def floor_log(x: float, base: float) -> int:
    """Largest k with ``base**k <= x``, robust to rounding in ``log``."""
    k = math.floor(math.log(x) / math.log(base))
    while base ** k > x:
        k -= 1
    while base ** (k + 1) <= x:
        k += 1
    return k


def quantize(w: float, epsilon: float) -> QuantizedWeight:
    """Round ``w`` down to an integer power of ``1 + epsilon``."""
    if not w > 0 or not epsilon > 0:
        raise ValueError("quantize needs w > 0 and epsilon > 0")
    return QuantizedWeight(floor_log(w, 1 + epsilon), epsilon)


class ThresholdFilter:
    """Drops edges lighter than ``eps * W_max / (2 (1+eps) n^2)``, where
    ``W_max`` is the heaviest weight seen so far (dropped edges included)."""

    def __init__(self, n: Optional[int], epsilon: float) -> None:
        self.n = n
        self.epsilon = epsilon
        self.w_max = 0.0
        self.dropped = 0
        self.enabled = n is not None
        if not self.enabled:
            log.warning("threshold filter disabled: no vertex-count bound configured")

    @property
    def delta(self) -> float:
        if not self.enabled:
            return 0.0
        return self.epsilon * self.w_max / (2 * (1 + self.epsilon) * self.n**2)

    def __call__(self, e: EdgeRecord) -> bool:
        """True to keep ``e``."""
        if e.w > self.w_max:
            self.w_max = e.w
        if self.enabled and e.w < self.delta:
            self.dropped += 1
            return False
        return True


def threshold_filter(state: ThresholdFilter, e: EdgeRecord) -> str:
    return "keep" if state(e) else "drop"


def window_width(n: int, epsilon: float) -> int:
    """Number of exponent positions below the top: ceil(log_{1+eps}(n^2/eps))."""
    return math.ceil(math.log(max(n, 2) ** 2 / epsilon) / math.log(1 + epsilon))


class CompactPhi:
    """Vertex potentials as bit arrays over powers of ``1 + eps``.

    Bit ``k`` of vertex ``v`` stands for ``(1+eps)**k``. Only exponents in a
    window below the heaviest weight seen so far are kept; whatever falls
    under the window is folded into ``small_mass[v]``, which is tracked for
    verification but never read by :meth:`get`.
    """

    def __init__(self, epsilon: float, n_bound: Optional[int] = None, w_max_exponent: int = 0) -> None:
        if not epsilon > 0:
            raise ValueError("CompactPhi needs epsilon > 0")
        self.epsilon = epsilon
        self.base = 1 + epsilon
        self.n_bound = n_bound if n_bound is not None else DEFAULT_N_BOUND
        self.width = window_width(self.n_bound, epsilon)
        # phi_v <= 2 W_max, so keep a few positions above the top weight
        self.headroom = math.ceil(math.log(2) / math.log(self.base)) + 1
        self.w_max_exponent = w_max_exponent
        self.bits: list[int] = []  # bit i <-> exponent (bottom + i) for this vertex's origin
        self.origin: list[int] = []
        self.value: list[float] = []
        self.small_mass: list[float] = []
        self.slides = 0

    @property
    def bottom(self) -> int:
        return self.w_max_exponent - self.width

    @property
    def top(self) -> int:
        return self.w_max_exponent + self.headroom

    @property
    def bits_per_vertex(self) -> int:
        return self.width + self.headroom + 1

    def small_mass_cap(self, w_max: float) -> float:
        return self.epsilon * w_max / self.n_bound

    def ensure(self, v: int) -> None:
        while len(self.bits) <= v:
            self.bits.append(0)
            self.origin.append(self.bottom)
            self.value.append(0.0)
            self.small_mass.append(0.0)

    def observe_weight(self, w: float) -> None:
        k = floor_log(w, self.base)
        if k > self.w_max_exponent:
            self.w_max_exponent = k
            self.slides += 1

    def _normalize(self, v: int) -> None:
        # fold bits that slid under the window into small_mass
        shift = self.bottom - self.origin[v]
        if shift <= 0:
            return
        mask = self.bits[v]
        low = mask & ((1 << shift) - 1)
        if low:
            folded = self._decode(low, self.origin[v])
            self.small_mass[v] += folded
            self.value[v] = self._decode(mask >> shift, self.bottom)
        self.bits[v] = mask >> shift
        self.origin[v] = self.bottom

    def _decode(self, mask: int, origin: int) -> float:
        terms = []
        i = 0
        while mask:
            if mask & 1:
                terms.append(self.base ** (origin + i))
            mask >>= 1
            i += 1
        return math.fsum(terms)

    def get(self, v: int) -> float:
        if v >= len(self.bits):
            return 0.0
        self._normalize(v)
        return self.value[v]

    def exponents(self, v: int) -> list[int]:
        self._normalize(v)
        mask, out, i = self.bits[v], [], 0
        while mask:
            if mask & 1:
                out.append(self.origin[v] + i)
            mask >>= 1
            i += 1
        return out

    def set_bit(self, v: int, exponent: int) -> None:
        self.ensure(v)
        self._normalize(v)
        if exponent < self.bottom:
            self.small_mass[v] += self.base**exponent
            return
        i = exponent - self.origin[v]
        if self.bits[v] >> i & 1:
            raise DistinctnessError(f"vertex {v}: exponent {exponent} already set")
        self.bits[v] |= 1 << i
        self.value[v] = self._decode(self.bits[v], self.origin[v])

    def add(self, v: int, amount: float) -> None:
        """Add a real amount: re-encode the new total greedily into distinct
        powers, top down; the remainder under the window goes to small_mass."""
        self.ensure(v)
        self._normalize(v)
        remaining = self.value[v] + amount
        mask = 0
        origin = self.origin[v]
        if remaining > 0:
            k = floor_log(remaining, self.base)
            while k >= origin and remaining > 0:
                p = self.base**k
                if p <= remaining:
                    mask |= 1 << (k - origin)
                    remaining -= p
                    # after taking base**k the rest is below eps * base**k
                k -= 1
        self.bits[v] = mask
        self.value[v] = self._decode(mask, origin)
        if remaining > 0:
            self.small_mass[v] += remaining

    def snapshot(self) -> list[float]:
        return [self.get(v) for v in range(len(self.bits))]

    def bytes_per_vertex(self) -> float:
        return math.ceil(self.bits_per_vertex / 8)


def compact_phi_add(cp: CompactPhi, v: int, wprime: QuantizedWeight) -> CompactPhi:
    """Set the bit for ``wprime`` on vertex ``v`` (raises on a repeated bit)."""
    cp.set_bit(v, wprime.exponent)
    return cp


@dataclass
class ShadowComparison:
    ok: bool
    worst_excess: float
    checked: int


def compare_with_shadow(cp: CompactPhi, shadow: Iterable[float], tau: float = TAU) -> ShadowComparison:
    """Decoded compact potentials must sit in [exact - small_mass, exact]."""
    worst = -math.inf
    ok = True
    count = 0
    for v, exact in enumerate(shadow):
        decoded = cp.get(v)
        slack = tau * max(exact, 1.0)
        lo_gap = (exact - cp.small_mass[v]) - decoded  # > 0 means too small
        hi_gap = decoded - exact  # > 0 means too large
        excess = max(lo_gap, hi_gap)
        worst = max(worst, excess / max(exact, 1.0))
        if excess > slack:
            ok = False
        count += 1
    return ShadowComparison(ok, worst if count else 0.0, count)


def preprocess(
    edges: Iterable[EdgeRecord],
    epsilon: float,
    quantize_weights: bool = False,
    threshold: Optional[ThresholdFilter] = None,
):
    """Yield ``(engine_edge, original_edge)`` after filtering and rounding."""
    for e in edges:
        if threshold is not None and not threshold(e):
            continue
        if quantize_weights:
            yield EdgeRecord(e.u, e.v, quantize(e.w, epsilon).value), e
        else:
            yield e, e

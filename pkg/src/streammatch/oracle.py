"""Ground truth for small graphs and reproducible stream generators.

Randomness comes only from ``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import EdgeRecord, Matching

ORACLE_CAP = 24

MODELS = ("gnm_random", "complete", "bipartite", "path", "star", "eviction_adversary")
WEIGHT_LAWS = ("uniform", "powers_of", "constant")
ORDERS = ("arrival_random", "weight_increasing", "weight_decreasing")


@dataclass
class SmallGraph:
    n: int
    edges: list[EdgeRecord]
    cap: int = ORACLE_CAP

    def __post_init__(self) -> None:
        if self.n > self.cap:
            raise ValueError(f"n={self.n} exceeds the oracle cap {self.cap}")
        for e in self.edges:
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise ValueError(f"edge {e} has an endpoint outside 0..{self.n - 1}")


def exact_mwm(g: SmallGraph) -> Matching:
    """Maximum-weight matching by memoised search over vertex subsets.

    ``best(S)`` either leaves the lowest vertex of S unmatched or matches it
    through one of its edges inside S.
    """
    if g.n > g.cap:
        raise ValueError(f"n={g.n} exceeds the oracle cap {g.cap}")
    # heaviest edge per vertex pair; parallel lighter copies never help
    heaviest: dict[tuple[int, int], EdgeRecord] = {}
    for e in g.edges:
        if e.u == e.v:
            continue
        key = (min(e.u, e.v), max(e.u, e.v))
        if key not in heaviest or e.w > heaviest[key].w:
            heaviest[key] = e
    adj: list[list[tuple[int, EdgeRecord]]] = [[] for _ in range(g.n)]
    for (a, b), e in heaviest.items():
        adj[a].append((b, e))

    memo: dict[int, float] = {0: 0.0}
    choice: dict[int, Optional[EdgeRecord]] = {}

    def best(mask: int) -> float:
        # explicit stack keeps recursion depth bounded
        stack = [mask]
        while stack:
            s = stack[-1]
            if s in memo:
                stack.pop()
                continue
            low = (s & -s).bit_length() - 1
            rest = s & ~(1 << low)
            pending = [rest] if rest not in memo else []
            for b, _ in adj[low]:
                sub = rest & ~(1 << b)
                if rest >> b & 1 and sub not in memo:
                    pending.append(sub)
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            value, pick = memo[rest], None
            for b, e in adj[low]:
                if rest >> b & 1:
                    cand = e.w + memo[rest & ~(1 << b)]
                    if cand > value:
                        value, pick = cand, e
            memo[s] = value
            choice[s] = pick
        return memo[mask]

    full = (1 << g.n) - 1
    best(full)
    edges = []
    s = full
    while s:
        pick = choice.get(s)
        low = (s & -s).bit_length() - 1
        if pick is None:
            s &= ~(1 << low)
        else:
            edges.append(pick)
            s &= ~(1 << pick.u) & ~(1 << pick.v)
    return Matching.from_edges(edges)


def brute_force_mwm(g: SmallGraph) -> float:
    """Weight of the best matching by enumerating every edge subset that is a
    matching. Independent of :func:`exact_mwm`; only for tiny graphs."""
    edges = [e for e in g.edges if e.u != e.v]
    best = 0.0

    def walk(i: int, used: int, total: float) -> None:
        nonlocal best
        if total > best:
            best = total
        for j in range(i, len(edges)):
            e = edges[j]
            bits = (1 << e.u) | (1 << e.v)
            if not used & bits:
                walk(j + 1, used | bits, total + e.w)

    walk(0, 0, 0.0)
    return best


def offline_greedy(g: SmallGraph) -> Matching:
    """Heaviest-first greedy matching (ties broken by endpoint pair)."""
    matched: set[int] = set()
    chosen = []
    for e in sorted(g.edges, key=lambda e: (-e.w, min(e.u, e.v), max(e.u, e.v))):
        if e.u == e.v or e.u in matched or e.v in matched:
            continue
        matched.update((e.u, e.v))
        chosen.append(e)
    return Matching.from_edges(chosen)


@dataclass(frozen=True)
class StreamSpec:
    """Recipe for a generated stream.

    For ``eviction_adversary``, ``n`` is the number of hubs; each hub gets
    beta+2 private leaves. ``order=None`` picks the model's natural order
    (weight_increasing for the adversary, arrival_random otherwise).
    """

    model: str = "gnm_random"
    n: int = 16
    m: int = 32
    weight_law: str = "uniform"
    w_max: float = 100.0
    epsilon: float = 0.25
    order: Optional[str] = None
    seed: int = 0
    beta: Optional[int] = None

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.weight_law not in WEIGHT_LAWS:
            raise ValueError(f"unknown weight law {self.weight_law!r}")
        if self.order is not None and self.order not in ORDERS:
            raise ValueError(f"unknown order {self.order!r}")
        if self.n < 0 or self.m < 0:
            raise ValueError("n and m must be non-negative")
        if self.w_max < 1:
            raise ValueError("w_max must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def resolved_order(self) -> str:
        if self.order is not None:
            return self.order
        return "weight_increasing" if self.model == "eviction_adversary" else "arrival_random"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "StreamSpec":
        return cls(**json.loads(text))


def _weights(spec: StreamSpec, rng: np.random.Generator, k: int) -> np.ndarray:
    if spec.weight_law == "constant":
        return np.ones(k)
    if spec.weight_law == "uniform":
        return rng.uniform(1.0, spec.w_max, size=k)
    base = 1 + spec.epsilon
    top = int(math.floor(math.log(spec.w_max) / math.log(base) + 1e-12))
    return base ** rng.integers(0, top + 1, size=k).astype(float)


def _random_pairs(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    total = n * (n - 1) // 2
    if m > total:
        raise ValueError(f"m={m} exceeds n(n-1)/2={total}")
    if m * 3 > total:
        # dense: sample pair indices without replacement
        idx = rng.choice(total, size=m, replace=False)
        pairs = []
        # unrank idx -> (a, b) with a < b in row-major order
        rows = np.cumsum([n - 1 - a for a in range(n)])
        for t in idx.tolist():
            a = int(np.searchsorted(rows, t, side="right"))
            start = int(rows[a - 1]) if a else 0
            pairs.append((a, a + 1 + t - start))
        return pairs
    seen: set[tuple[int, int]] = set()
    pairs = []
    while len(pairs) < m:
        batch = rng.integers(0, n, size=(2 * (m - len(pairs)) + 8, 2))
        for a, b in batch.tolist():
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in seen:
                continue
            seen.add(key)
            pairs.append(key)
            if len(pairs) == m:
                break
    return pairs


def generate_stream(spec: StreamSpec) -> list[EdgeRecord]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.n
    if spec.model == "eviction_adversary":
        return _order(_adversary(spec), spec, rng)
    if spec.model == "gnm_random":
        pairs = _random_pairs(n, spec.m, rng)
    elif spec.model == "complete":
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    elif spec.model == "bipartite":
        left = n // 2
        right = n - left
        if spec.m > left * right:
            raise ValueError(f"m={spec.m} exceeds {left}*{right} bipartite pairs")
        idx = rng.choice(left * right, size=spec.m, replace=False)
        pairs = [(int(t) // right, left + int(t) % right) for t in idx]
    elif spec.model == "path":
        pairs = [(a, a + 1) for a in range(n - 1)]
    else:
        pairs = [(0, b) for b in range(1, n)]
    ws = _weights(spec, rng, len(pairs)).tolist()
    edges = [EdgeRecord(a, b, float(w)) for (a, b), w in zip(pairs, ws)]
    return _order(edges, spec, rng)


def _adversary(spec: StreamSpec) -> list[EdgeRecord]:
    from .engine import default_beta

    beta = spec.beta if spec.beta is not None else default_beta(spec.epsilon)
    growth = (1 + spec.epsilon) ** beta * (1 + spec.epsilon)
    if (beta + 1) * math.log(growth) > math.log(1e300):
        raise ValueError(f"adversary weights overflow for epsilon={spec.epsilon}, beta={beta}")
    edges = []
    nxt = spec.n
    for hub in range(spec.n):
        w = 1.0
        for _ in range(beta + 2):
            edges.append(EdgeRecord(hub, nxt, w))
            nxt += 1
            w *= growth
    return edges


def _order(edges: list[EdgeRecord], spec: StreamSpec, rng: np.random.Generator) -> list[EdgeRecord]:
    order = spec.resolved_order()
    if order == "arrival_random":
        perm = rng.permutation(len(edges)).tolist()
        return [edges[i] for i in perm]
    return sorted(edges, key=lambda e: e.w, reverse=order == "weight_decreasing")

import random

import pytest

from streammatch.oracle import SmallGraph, StreamSpec, exact_mwm, generate_stream

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, passed, detail)``."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _CRITERIA.append((name, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


def random_instance(seed: int, n_max: int = 16, m_max: int = 60, w_max: float = 100.0, **kw):
    """Seeded small gnm instance: (n, m, spec kwargs)."""
    rng = random.Random(seed)
    n = rng.randint(2, n_max)
    m = rng.randint(1, min(m_max, n * (n - 1) // 2))
    return n, m, dict(model="gnm_random", n=n, m=m, w_max=w_max, seed=seed, **kw)


def optimum(n, edges) -> float:
    return exact_mwm(SmallGraph(n, edges)).total_weight


@pytest.fixture
def path_edges():
    from streammatch.core import EdgeRecord

    return [EdgeRecord(0, 1, 1.0), EdgeRecord(1, 2, 2.0)]


def gen(**kw):
    return generate_stream(StreamSpec(**kw))

import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gen, random_instance
from streammatch.core import EdgeRecord
from streammatch.engine import EngineConfig, run_stream
from streammatch.oracle import (
    SmallGraph,
    StreamSpec,
    brute_force_mwm,
    exact_mwm,
    offline_greedy,
)
from streammatch.streamio import write_edges

TRIANGLE = [EdgeRecord(0, 1, 1.0), EdgeRecord(1, 2, 2.0), EdgeRecord(0, 2, 3.0)]
PATH = [EdgeRecord(0, 1, 1.0), EdgeRecord(1, 2, 2.0)]
C4 = [EdgeRecord(0, 1, 3.0), EdgeRecord(1, 2, 1.0), EdgeRecord(2, 3, 3.0), EdgeRecord(3, 0, 1.0)]


def all_matchings(edges):
    out = []
    for k in range(len(edges) + 1):
        for combo in itertools.combinations(edges, k):
            ends = [x for e in combo for x in (e.u, e.v)]
            if len(ends) == len(set(ends)):
                out.append(combo)
    return out


def test_c4_enumeration():
    ms = all_matchings(C4)
    assert len(ms) == 7
    assert max(sum(e.w for e in m) for m in ms) == 6.0
    assert exact_mwm(SmallGraph(4, C4)).total_weight == 6.0


@pytest.mark.parametrize("edges, n, expected", [(TRIANGLE, 3, 3.0), (PATH, 3, 2.0), (C4, 4, 6.0)])
def test_exact_examples(edges, n, expected):
    m = exact_mwm(SmallGraph(n, edges))
    assert m.total_weight == expected and m.is_valid()


def test_exact_refuses_large_graphs():
    with pytest.raises(ValueError):
        SmallGraph(30, [])


def test_greedy_examples():
    assert offline_greedy(SmallGraph(3, TRIANGLE)).total_weight == 3.0
    m = offline_greedy(SmallGraph(3, PATH))
    assert m.edges == [EdgeRecord(1, 2, 2.0)]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32))
def test_exact_matches_independent_enumeration(seed):
    n, m, kw = random_instance(seed, n_max=10, m_max=20)
    edges = gen(**kw)
    g = SmallGraph(n, edges)
    best = exact_mwm(g)
    assert best.is_valid()
    assert best.total_weight == pytest.approx(brute_force_mwm(g), rel=1e-12)
    assert offline_greedy(g).total_weight >= best.total_weight / 2


def test_exact_handles_parallel_edges():
    g = SmallGraph(2, [EdgeRecord(0, 1, 1.0), EdgeRecord(1, 0, 4.0)])
    assert exact_mwm(g).total_weight == 4.0


def test_path_model():
    assert len(gen(model="path", n=3)) == 2


@pytest.mark.parametrize("model", ["gnm_random", "complete", "bipartite", "path", "star", "eviction_adversary"])
def test_same_seed_same_bytes(model, tmp_path):
    import io

    spec = dict(model=model, n=10, m=12, seed=99, epsilon=0.25)
    a, b = io.StringIO(), io.StringIO()
    write_edges(a, gen(**spec))
    write_edges(b, gen(**spec))
    assert a.getvalue() == b.getvalue()
    assert a.getvalue() != ""


def test_different_seeds_differ():
    assert gen(n=10, m=20, seed=1) != gen(n=10, m=20, seed=2)


@pytest.mark.parametrize("model", ["gnm_random", "complete", "bipartite"])
def test_declared_orders(model):
    up = gen(model=model, n=12, m=20, order="weight_increasing", seed=4)
    down = gen(model=model, n=12, m=20, order="weight_decreasing", seed=4)
    assert [e.w for e in up] == sorted(e.w for e in up)
    assert [e.w for e in down] == sorted((e.w for e in down), reverse=True)
    assert sorted(up) == sorted(down)


def test_simple_models_have_no_duplicates_or_loops():
    for model in ("gnm_random", "complete", "bipartite"):
        edges = gen(model=model, n=14, m=40, seed=3)
        keys = [(min(e.u, e.v), max(e.u, e.v)) for e in edges]
        assert len(keys) == len(set(keys))
        assert all(e.u != e.v for e in edges)


def test_dense_gnm_sampling():
    edges = gen(n=8, m=28, seed=5)
    assert len({(min(e.u, e.v), max(e.u, e.v)) for e in edges}) == 28


@pytest.mark.parametrize("kw", [dict(model="gnm_random", n=4, m=7), dict(model="bipartite", n=4, m=5)])
def test_inconsistent_spec(kw):
    with pytest.raises(ValueError):
        gen(**kw)


def test_weight_laws():
    assert {e.w for e in gen(weight_law="constant", n=6, m=10)} == {1.0}
    for e in gen(weight_law="uniform", n=10, m=30, w_max=50):
        assert 1 <= e.w <= 50
    for e in gen(weight_law="powers_of", epsilon=0.5, n=10, m=30, w_max=1000):
        k = round(__import__("math").log(e.w, 1.5))
        assert e.w == pytest.approx(1.5**k) and 1 <= e.w <= 1000


def test_adversary_forces_evictions():
    edges = gen(model="eviction_adversary", n=2, epsilon=0.25)
    r = run_stream(edges, EngineConfig(0.25, "capped", trace_enabled=True))
    evicted = [ev for ev in r.trace if ev.decision == "evicted"]
    assert len(evicted) >= 1 and r.stats.edges_evicted == len(evicted)


def test_adversary_overflow_is_refused():
    with pytest.raises(ValueError):
        gen(model="eviction_adversary", n=1, epsilon=1 / 16)


def test_spec_json_roundtrip():
    spec = StreamSpec(model="star", n=5, seed=2**63)
    assert StreamSpec.from_json(spec.to_json()) == spec
    assert json.loads(spec.to_json())["model"] == "star"

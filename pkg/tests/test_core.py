import pytest
from hypothesis import given
from hypothesis import strategies as st

from streammatch.core import EdgeRecord, Matching, RemapTable, StreamStats, remap_vertex


def test_remap_first_vertex_gets_zero():
    t = RemapTable()
    assert remap_vertex(7, t) == 0


def test_remap_is_idempotent():
    t = RemapTable()
    remap_vertex(7, t)
    assert remap_vertex(7, t) == 0
    assert len(t) == 1


def test_remap_dense_sequential():
    t = RemapTable()
    remap_vertex(7, t)
    remap_vertex(9, t)
    assert remap_vertex(3, t) == 2
    assert [t.raw(i) for i in range(3)] == [7, 9, 3]


def test_remap_rejects_negative():
    with pytest.raises(ValueError):
        remap_vertex(-1, RemapTable())


@given(st.lists(st.integers(min_value=0, max_value=10**12)))
def test_remap_is_bijection_onto_prefix(raws):
    t = RemapTable()
    ids = [t.remap(r) for r in raws]
    distinct = set(raws)
    assert set(ids) == set(range(len(distinct)))
    assert all(t.raw(i) == r for i, r in zip(ids, raws))


def test_matching_validity():
    ok = Matching.from_edges([EdgeRecord(0, 1, 2.0), EdgeRecord(2, 3, 1.5)])
    assert ok.is_valid() and ok.total_weight == 3.5
    clash = Matching.from_edges([EdgeRecord(0, 1, 2.0), EdgeRecord(1, 3, 1.5)])
    assert not clash.is_valid()
    wrong_total = Matching([EdgeRecord(0, 1, 2.0)], 3.0)
    assert not wrong_total.is_valid()


def test_stats_check_flags_inconsistency():
    s = StreamStats(edges_seen=3, edges_pushed=1, edges_skipped=1)
    assert "edges_seen != edges_pushed + edges_skipped" in s.check(0)
    assert StreamStats(edges_seen=2, edges_pushed=1, edges_skipped=1, peak_stack_size=1).check(1) == []

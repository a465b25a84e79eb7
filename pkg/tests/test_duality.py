import pytest
from hypothesis import given, strategies as st

from graphhom.complexes import ComplexSpec
from graphhom.duality import ShiftMismatch, duality_report, find_shift, sheaf_side_table


@pytest.mark.parametrize("kwargs,shift", [
    (dict(operad="comm", rank=2), 2),
    (dict(operad="lie", rank=2), 2),
    (dict(operad="comm", rank=3), 5),
    (dict(operad="t", genus=0, boundary=3), 2),
    (dict(operad="t", genus=1, boundary=1), 2),
])
def test_duality_reports(kwargs, shift):
    rep = duality_report(**kwargs)
    assert rep["passed"]
    assert rep["shift_observed"] == shift == rep["expected_shift"]
    assert rep["tables"]["sheaf"] == {"0": 1}


def test_report_records_all_tables():
    rep = duality_report("comm", rank=2)
    assert set(rep["tables"]) == {"O_twisted", "O_standard", "DO_twisted", "DO_h_twisted", "sheaf"}
    assert rep["tables"]["O_standard"] == {"2": 1}
    assert rep["tables"]["O_twisted"] == {}
    assert rep["family"] == {"rank": 2}


def test_sheaf_side_is_concentrated_in_degree_zero():
    assert sheaf_side_table(ComplexSpec("comm", rank=2, orientation="twisted")) == {0: 1}


def test_dual_operad_name_is_rejected():
    with pytest.raises(ValueError):
        duality_report("dcomm", rank=2)


@given(st.dictionaries(st.integers(-6, 6), st.integers(1, 4), max_size=4), st.integers(-10, 10))
def test_find_shift_recovers_reflection(table, c):
    other = {c - k: v for k, v in table.items()}
    ok, found = find_shift(table, other)
    assert ok
    assert found == (c if table else None)


def test_find_shift_rejects_mismatch():
    assert find_shift({0: 1, 1: 1}, {0: 1}) == (False, None)
    assert find_shift({}, {2: 1}) == (False, None)
    assert find_shift({0: 1, 1: 2}, {0: 1, 1: 2}) == (False, None)


def test_shift_mismatch_carries_report():
    err = ShiftMismatch("boom", {"passed": False})
    assert err.report == {"passed": False}

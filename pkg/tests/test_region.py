from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from spherelab.lab import region as R


def test_table_d2_half():
    v = R.region_vertices(2, Fr(1, 2))
    assert v.H == (Fr(2, 3), Fr(2, 3))
    assert v.E == (Fr(3, 5), Fr(2, 5))
    assert v.P == (Fr(2, 3), Fr(2, 3))
    assert v.Q is None and v.R is None


def test_float_input_is_exact():
    assert R.region_vertices(2, 0.5) == R.region_vertices(2, Fr(1, 2))


def test_endpoint_s_allowed_and_guards():
    v = R.region_vertices(4, 3)
    assert v.H == (Fr(1, 2), Fr(1, 2))
    with pytest.raises(ValueError):
        R.region_vertices(2, 2)
    with pytest.raises(ValueError):
        R.region_vertices(1, Fr(1, 2))


def test_strong_type_excludes_E_and_H():
    v = R.region_vertices(2, Fr(1, 2))
    assert not R.strong_type(v, v.E) and not R.strong_type(v, v.H)
    mid = ((v.E[0] + v.H[0]) / 2, (v.E[1] + v.H[1]) / 2)
    assert R.strong_type(v, mid)
    assert R.strong_type(v, (Fr(0), Fr(0)))
    assert R.strong_type(v, (Fr(2, 5), Fr(3, 10)))
    assert not R.strong_type(v, (Fr(7, 10), Fr(2, 5)))
    assert R.restricted_weak_type(v, v.E) and R.restricted_weak_type(v, v.H)


def test_late_case_excludes_whole_edge():
    v = R.region_vertices(3, Fr(7, 4))
    mid = ((v.E[0] + v.H[0]) / 2, (v.E[1] + v.H[1]) / 2)
    assert R.in_delta(v, mid) and not R.strong_type(v, mid)
    assert not R.restricted_weak_type(v, v.H)


def test_omega_is_open():
    v = R.region_vertices(2, Fr(1, 2))
    assert not R.in_omega(v, v.P)
    assert not R.in_omega(v, (Fr(1, 2), Fr(0)))
    assert R.in_omega(v, (Fr(1, 4), Fr(1, 4)))
    w = R.region_vertices(3, Fr(1, 2))
    assert w.Q == (Fr(1), Fr(3, 5)) and w.R == (Fr(3, 5), Fr(1))
    assert R.in_omega(w, (Fr(9, 10), Fr(1, 2)))
    assert not R.in_omega(v, (Fr(9, 10), Fr(1, 2)))


def test_sharpness_exponent_examples():
    assert float(R.sharpness_E_exponent(2, Fr(1, 2), Fr(5, 2), Fr(10, 3))) == pytest.approx(-0.35)
    assert float(R.sharpness_E_exponent(2, Fr(1, 2), Fr(10, 7), Fr(5, 2))) == pytest.approx(0.2)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.fractions(Fr(1, 50), Fr(5)))
def test_vertices_lie_on_the_sharpness_line_and_in_square(d, s):
    if s > d - 1:
        return
    v = R.region_vertices(d, s)
    # E sits exactly on the line where the ball family stops blowing up
    assert R.sharpness_E_exponent(d, s, 1 / v.E[0], 1 / v.E[1]) == 0
    for pt in (v.H, v.E, v.P):
        assert 0 < pt[0] <= 1 and 0 < pt[1] <= 1
    assert isinstance(v.H[0], Fr)
    assert R.in_delta(v, v.H) and R.in_delta(v, v.E)

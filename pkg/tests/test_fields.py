import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherelab import fields as F


def test_grid_geometry():
    g = F.empty_grid(((-1, 0), (1, 2)), (4, 8))
    assert g.shape == (4, 8)
    assert np.allclose(g.spacing, [0.5, 0.25])
    assert g.cell_volume == pytest.approx(0.125)
    assert np.allclose(g.axis_centers(0), [-0.75, -0.25, 0.25, 0.75])
    assert g.points().shape == (32, 2)


def test_grid_is_immutable():
    g = F.empty_grid((-1, 1), 4, d=2)
    with pytest.raises(ValueError):
        g.values[0, 0] = 1.0


def test_grid_guards():
    with pytest.raises(ValueError):
        F.empty_grid((1, -1), 4, d=2)
    with pytest.raises(ValueError):
        F.sample(lambda x: x[:, 0], (0, 1), 1, d=2)


def test_interp_reproduces_bilinear_and_vanishes_outside():
    f = lambda x: 1 + 2 * x[:, 0] - x[:, 1] + 0.5 * x[:, 0] * x[:, 1]
    g = F.sample(f, (-1, 1), 9, d=2)
    pts = np.random.default_rng(0).uniform(-1, 1, size=(200, 2))
    assert np.allclose(g(pts), f(pts), atol=1e-13)
    assert g(np.array([1.5, 0.0])) == 0.0


def test_lp_norms_of_constant():
    g = F.sample(lambda x: np.full(len(x), 2.0), (0, 1), 8, d=2)
    assert F.lp_norm(g, 1) == pytest.approx(2.0)
    assert F.lp_norm(g, 2) == pytest.approx(2.0)
    assert F.lp_norm(g, 0.5) == pytest.approx(2.0)
    assert F.lp_norm(g, np.inf) == 2.0


def test_lorentz_of_indicator():
    g = F.sample(lambda x: (x[:, 0] < 0.25).astype(float), (0, 1), 16, d=2)
    V = 0.25
    for p, r in [(1.5, 1.0), (1.5, 2.0), (2.0, 3.0)]:
        assert F.lorentz_norm(g, F.LorentzExponent(p, r)) == pytest.approx((p / r) ** (1 / r) * V ** (1 / p))
    assert F.lorentz_norm(g, F.LorentzExponent(1.5)) == pytest.approx(V ** (1 / 1.5))


def test_lorentz_exponent_validation():
    with pytest.raises(ValueError):
        F.LorentzExponent(0.5)
    with pytest.raises(ValueError):
        F.LorentzExponent(2.0, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(1.0, 4.0))
def test_lorentz_diagonal_is_lp(seed, p):
    v = np.random.default_rng(seed).integers(0, 5, size=(12, 12)).astype(float)
    v[0, 0] = 1.0
    g = F.GridFunction((0, 0), (1, 1), v)
    assert F.lorentz_norm(g, F.LorentzExponent(p, p)) == pytest.approx(F.lp_norm(g, p), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_layer_cake_is_l1(seed):
    v = np.random.default_rng(seed).normal(size=(10, 7))
    g = F.GridFunction((0, 0), (2, 1), v)
    assert F.layer_cake_integral(g) == pytest.approx(F.lp_norm(g, 1), rel=1e-12)


def test_distribution_monotone():
    g = F.sample(lambda x: np.exp(-np.sum(x**2, axis=1)), (-2, 2), 32, d=2)
    dist = F.distribution(g, 20)
    assert np.all(np.diff(dist.measures) <= 0)
    assert F.measure_above(g, 0.0)[0] == pytest.approx(16.0)


def test_hl_maximal_dominates_and_fixes_constants():
    rng = np.random.default_rng(3)
    g = F.GridFunction((-1, -1), (1, 1), rng.random((20, 20)))
    M = F.hl_maximal(g)
    assert np.all(M.values >= np.abs(g.values))
    one = g.with_values(np.ones((20, 20)))
    assert np.allclose(F.hl_maximal(one).values, 1.0)


def test_nec_counterexample_structure():
    f, T = F.nec_counterexample(2, 0.5, 2)
    assert set(np.unique(f.values)) <= {0.0, 4.0, 20.0}
    assert T.dim == 2 and np.all(T.points[:, 1] == 0)
    assert np.max(f.spacing) <= 0.5 * 4.0**-2 / 4 + 1e-15
    with pytest.raises(ValueError, match="bridge"):
        F.nec_counterexample(2, 0.5, 2, a=2.0)
    with pytest.raises(ValueError):
        F.nec_counterexample(2, 0.5, 5, max_cells=1000)


def test_nec_cantor_pair_difference_covers():
    # complementary digits: C2 - C1 fills [-1/2, 1]
    c1, c2 = F.nec_cantor_pair(0.5, 6)
    diff = np.sort((c2.points[:, 0][:, None] - c1.points[:, 0][None]).ravel())
    assert diff.min() == pytest.approx(-0.5, abs=c1.resolution)
    assert diff.max() == pytest.approx(1.0, abs=c1.resolution)
    assert np.max(np.diff(diff)) <= 2 * c1.resolution


def test_grid_binary_roundtrip(tmp_path):
    g = F.GridFunction((-1, 0), (1, 3), np.arange(12.0).reshape(3, 4))
    F.write_grid(tmp_path / "g.bin", g)
    raw = (tmp_path / "g.bin").read_bytes()
    assert len(raw) == 8 + 16 + 16 + 16 + 12 * 8
    back = F.read_grid(tmp_path / "g.bin")
    assert back.same_grid(g) and np.array_equal(back.values, g.values)
    F.export_csv(tmp_path / "g.csv", g)
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "x0,x1,value" and len(lines) == 13
    assert float(lines[-1].split(",")[-1]) == 11.0

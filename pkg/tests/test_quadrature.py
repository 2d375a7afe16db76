import math

import numpy as np
import pytest

from spherelab import quadrature as Q


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_sphere_moments(n):
    r = Q.sphere_rule(n, 2)
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(np.linalg.norm(r.nodes, axis=1), 1.0)
    x = r.nodes[:, 0]
    assert r.integrate(lambda y: y[:, 0] ** 2) == pytest.approx(1 / n, abs=1e-13)
    assert r.integrate(lambda y: y[:, -1] ** 4) == pytest.approx(3 / (n * (n + 2)), abs=1e-13)
    assert abs(np.sum(r.weights * x**3)) < 1e-14


def test_circle_rule_exact_on_trig():
    r = Q.circle_rule(16)
    th = np.arctan2(r.nodes[:, 1], r.nodes[:, 0])
    for k in range(1, 16):
        assert abs(np.sum(r.weights * np.cos(k * th))) < 1e-14
    assert r.max_gap == pytest.approx(2 * math.pi / 16)


def test_monte_carlo_requires_seed_and_is_reproducible():
    with pytest.raises(ValueError):
        Q.sphere_rule(3, 1, monte_carlo=True)
    a = Q.sphere_rule(3, 1, monte_carlo=True, seed=7)
    b = Q.sphere_rule(3, 1, monte_carlo=True, seed=7)
    assert np.array_equal(a.nodes, b.nodes)
    assert abs(a.integrate(lambda y: y[:, 0] ** 2) - 1 / 3) < 0.02


def test_unsupported_dimension():
    with pytest.raises(ValueError):
        Q.sphere_rule(5, 1)


@pytest.mark.parametrize("n", [2, 3])
def test_annulus_second_moment(n):
    delta = 0.2
    ann = Q.annulus_rule(n, delta, 2)
    a, b = 1 - delta, 1 + delta
    exact = n / (n + 2) * (b ** (n + 2) - a ** (n + 2)) / (b**n - a**n)
    assert ann.integrate(lambda y: np.sum(y**2, axis=1)) == pytest.approx(exact, rel=1e-13)
    assert ann.volume == pytest.approx(Q.unit_ball_volume(n) * (b**n - a**n))


def test_shell_volume_d2():
    assert Q.shell_volume(2, 0.1) == pytest.approx(math.pi * 0.4)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_slicing_radial_moments(d):
    s = Q.slicing_weights(d, 2)
    assert np.allclose(s.r**2 + s.z_scale**2, 1.0)
    assert np.sum(s.weights * s.r**2) == pytest.approx(0.5, abs=1e-14)
    # |y|^2 ~ Beta(d/2, d/2) under the uniform measure on S^(2d-1)
    assert np.sum(s.weights * s.r**4) == pytest.approx(0.25 + 0.25 / (d + 1), abs=1e-14)


@pytest.mark.parametrize("d,level", [(2, 3), (3, 2)])
def test_sliced_equals_direct_on_polynomial(d, level):
    sl = Q.slicing_weights(d, 2)
    inner = Q.sphere_rule(d, 3)
    direct = Q.sphere_rule(2 * d, level)
    F = lambda y, z: y[:, 0] ** 2 * z[:, 0] ** 2
    exact = 1 / (2 * d * (2 * d + 2))
    assert Q.integrate_sliced(sl, inner, F) == pytest.approx(exact, abs=1e-14)
    assert Q.integrate_direct(direct, F) == pytest.approx(exact, abs=1e-14)


def test_sliced_product_matches_sliced():
    sl, inner = Q.slicing_weights(2, 2), Q.sphere_rule(2, 2)
    g1 = lambda y: np.exp(-np.sum((y - 0.3) ** 2, axis=1))
    g2 = lambda z: np.cos(z[:, 0]) + z[:, 1]
    a = Q.integrate_sliced_product(sl, inner, g1, g2)
    b = Q.integrate_sliced(sl, inner, lambda y, z: g1(y) * g2(z))
    assert a == pytest.approx(b, abs=1e-14)

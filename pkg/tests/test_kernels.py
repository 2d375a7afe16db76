import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherelab import _kernels_py as py
from spherelab import kernels

compiled = pytest.importorskip("spherelab._kernels")


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "python")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_interp_parity(seed, d):
    rng = np.random.default_rng(seed)
    vals = rng.random((6,) * d)
    lo = rng.uniform(-1, 0, size=d)
    inv_h = rng.uniform(1, 4, size=d)
    pts = rng.uniform(-2, 3, size=(100, d))
    assert np.allclose(py.interp(vals, lo, inv_h, pts), compiled.interp(vals, lo, inv_h, pts),
                       rtol=1e-14, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_translate_sum_parity(seed):
    rng = np.random.default_rng(seed)
    vals = rng.random((20, 20))
    lo, inv_h = np.array([-1.0, -1.0]), np.array([10.0, 10.0])
    c = rng.uniform(-1.5, 1.5, size=(50, 2))
    o = rng.normal(scale=0.5, size=(30, 2))
    w = rng.random(30)
    a = py.translate_sum(vals, lo, inv_h, c, o, w)
    b = compiled.translate_sum(vals, lo, inv_h, c, o, w)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)
    a2 = py.translate_sum_pair(vals, lo, inv_h, vals.T.copy(), lo, inv_h, c, o, -o, w)
    b2 = compiled.translate_sum_pair(vals, lo, inv_h, vals.T.copy(), lo, inv_h, c, o, -o, w)
    assert np.allclose(a2, b2, rtol=1e-13, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.01, 0.5))
def test_greedy_net_parity(seed, delta):
    pts = np.random.default_rng(seed).random((200, 2))
    assert np.array_equal(py.greedy_net(pts, delta), compiled.greedy_net(pts, delta))


def test_fallback_selected_by_environment(monkeypatch):
    import importlib
    monkeypatch.setenv("SPHERELAB_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python" and mod.interp is py.interp
    finally:
        monkeypatch.delenv("SPHERELAB_PURE")
        importlib.reload(kernels)

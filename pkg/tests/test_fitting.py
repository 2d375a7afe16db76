import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherelab.fitting import exponent_fit


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 100), st.integers(3, 12))
def test_exact_power_law(slope, c, n):
    x = np.geomspace(1, 1000, n)
    fit = exponent_fit(list(zip(x, c * x**slope)))
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(np.log(c), abs=1e-9)
    assert fit.max_residual < 1e-9


def test_guards():
    with pytest.raises(ValueError, match="3 points"):
        exponent_fit([(1, 1), (2, 2)])
    with pytest.raises(ValueError, match="positive"):
        exponent_fit([(1, 1), (2, 0), (3, 1)])
    with pytest.raises(ValueError, match="degenerate"):
        exponent_fit([(2, 1), (2, 2), (2, 3)])

import numpy as np
import pytest

from spherelab import fields as F
from spherelab import operators as O
from spherelab import quadrature as Q
from spherelab.lab.nec import NecEvaluator


def test_evaluator_matches_generic_operator():
    # arc parametrisation with exact tubes vs the grid operator, N = 2;
    # f vanishes outside its box, which is also how off-grid points evaluate
    s, N = 0.5, 2
    f, T = F.nec_counterexample(2, s, N)
    ev = NecEvaluator(s, N, nodes_per_level=512)
    rows = np.array([-0.3, 0.0, 0.25])
    x1, fast, _ = ev.maximal_rows(-1.2, -0.2, rows)
    sel = slice(0, None, 16)
    at = np.array([[a, b] for b in rows for a in x1[sel]])
    slow = O.maximal_over_set(f, T, 1.0, Q.circle_rule(40000), at=at).values.reshape(len(rows), -1)
    err = np.abs(fast[:, sel] - slow)
    assert err.max() < 0.03 * slow.max()


def test_rows_near_tangency_refused():
    ev = NecEvaluator(0.5, 2)
    with pytest.raises(ValueError, match="tangency"):
        ev.maximal_rows(-1.0, 0.0, [0.95])

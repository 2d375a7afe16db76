"""Fast evaluation of A^T_1 f for the restricted weak-type counterexample (d = 2).

f is a sum of tubes around the segment set C2 e1, so it lives in the strip
|x_2| < a/4.  For a circle of radius 1 around z, only the two arcs crossing
the strip matter; parametrising them by the height p_2 gives

    A^0_1 f(z) = (1/2pi) sum_{+-} int f(z_1 +- sqrt(1 - (p_2 - z_2)^2), p_2)
                 dp_2 / sqrt(1 - (p_2 - z_2)^2),

and A^u_1 f(x) = A^0_1 f(x + u).  With T on the e1 axis the sup over u
becomes a sup over shifts of one row of base values, so a row costs one
base evaluation plus |T| shifted maxima.  The tube indicator is evaluated
exactly from the distance to C2 (through its depth-``depth`` intervals),
which is the same definition used to fill the grid in
:func:`spherelab.fields.nec_counterexample`.
"""
import math

import numpy as np

from ..fields import _dist_to_intervals, nec_cantor_pair


class NecEvaluator:
    def __init__(self, s, N, a=0.5, depth=None, nodes_per_level=32, complementary=None):
        if not 0 < s < 1:
            raise ValueError("s must lie in (0, 1)")
        self.s, self.N, self.a = s, N, a
        self.h = a * 4.0**-N / 4.0  # lattice step along e1, as in the grid
        lam_min = min(2.0 ** (-1.0 / s), 2.0 ** (-1.0 / (1.0 - s)))
        depth = depth or max(1, math.ceil(math.log(self.h / 4.0) / math.log(lam_min)))
        self.c1, self.c2 = nec_cantor_pair(s, depth, complementary)
        self.left = np.sort(self.c2.points[:, 0]) - self.c2.resolution / 2.0
        self.length = self.c2.resolution
        self.K = nodes_per_level
        self.shifts = np.unique(np.round(self.c1.points[:, 0] / self.h).astype(np.int64))

    def base_row(self, z1, z2):
        """A^0_1 f at (z1[i], z2); midpoint rule with K nodes per tube level."""
        out = np.zeros_like(z1)
        for i in range(1, self.N + 1):
            r = self.a * 4.0**-i
            p2 = (np.arange(self.K) + 0.5) / self.K * 2 * r - r
            s = np.sqrt(1.0 - (p2 - z2) ** 2)
            w = (2 * r / self.K) / (2 * math.pi * s)
            for sign in (1.0, -1.0):
                p1 = z1[:, None] + sign * s[None, :]
                dist = _dist_to_intervals(p1.ravel(), self.left, self.length).reshape(p1.shape)
                inside = dist**2 + p2[None, :] ** 2 < r * r
                out += 4.0**i * (inside @ w)
        return out

    def maximal_rows(self, x1_lo, x1_hi, rows):
        """A^T_1 f on the lattice x1 = h * k in [x1_lo, x1_hi] for each x2 in rows.

        Returns (x1, values[len(rows), len(x1)], argmax shift index)."""
        k0 = int(math.floor(x1_lo / self.h))
        k1 = int(math.ceil(x1_hi / self.h))
        x1 = np.arange(k0, k1 + 1) * self.h
        smin, smax = int(self.shifts.min()), int(self.shifts.max())
        z1 = np.arange(k0 + smin, k1 + smax + 1) * self.h
        vals = np.zeros((len(rows), x1.size))
        arg = np.zeros((len(rows), x1.size), dtype=np.int64)
        for r, x2 in enumerate(rows):
            if abs(x2) + self.a / 4 >= 1:
                raise ValueError("rows must stay clear of tangency (|x2| + a/4 < 1)")
            base = self.base_row(z1, float(x2))
            best = np.full(x1.size, -np.inf)
            for j, sh in enumerate(self.shifts):
                v = base[sh - smin: sh - smin + x1.size]
                better = v > best
                best[better] = v[better]
                arg[r, better] = j
            vals[r] = best
        return x1, vals, arg

"""Spherical, lacunary and Nikodym averages and their maximal functions,
linear and bilinear, evaluated on GridFunctions.

Every maximal operator returns an :class:`OperatorOutput` that records, per
output point, which candidate (translation ``u``, pair ``(u, v)``, scale
``k``) attained the supremum.  ``OperatorOutput.replay`` re-evaluates those
witnesses and must reproduce the stored values bit for bit.
"""
from dataclasses import dataclass, field
import math
import struct

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .fields import GridFunction, write_grid
from .geomsets import covering_number
from .quadrature import slicing_weights, sphere_rule

DEFAULT_PAIR_BUDGET = 1 << 30


@dataclass(frozen=True)
class LacunaryRange:
    k_min: int
    k_max: int

    def __post_init__(self):
        if self.k_min > self.k_max:
            raise ValueError(f"empty lacunary range [{self.k_min}, {self.k_max}]")

    @property
    def ks(self):
        return list(range(self.k_min, self.k_max + 1))

    def __len__(self):
        return self.k_max - self.k_min + 1


@dataclass(eq=False)
class OperatorOutput:
    values: np.ndarray
    points: np.ndarray
    grid: GridFunction | None = None
    witness: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    candidates: list = field(default_factory=list)
    _evaluate: object = None

    @property
    def value_grid(self):
        if self.grid is None:
            raise ValueError("output was evaluated at scattered points, not on a grid")
        return self.grid.with_values(self.values)

    def replay(self):
        """Re-evaluate each point at its recorded witness; returns the values."""
        if self._evaluate is None:
            raise ValueError("this output carries no evaluator to replay")
        idx = self.witness["candidate"]
        flat = np.empty(self.points.shape[0])
        for c in np.unique(idx):
            sel = np.flatnonzero(idx == c)
            flat[sel] = self._evaluate(self.candidates[c], self.points[sel])
        return flat.reshape(self.values.shape)

    def replay_matches(self):
        return bool(np.array_equal(self.replay(), self.values))


def _targets(f, grid, at):
    if at is not None:
        pts = np.atleast_2d(np.asarray(at, dtype=np.float64))
        if pts.shape[1] != f.dim:
            raise ValueError(f"query points have dimension {pts.shape[1]}, f has {f.dim}")
        return pts, None, (pts.shape[0],)
    g = f if grid is None else grid
    if g.dim != f.dim:
        raise ValueError("output grid dimension differs from f")
    return g.points(), g, g.shape


def _tsum(f, centers, offsets, weights):
    return kernels.translate_sum(f.values, f.lo, 1.0 / f.spacing, centers, offsets, weights)


def _tsum_pair(f1, f2, centers, o1, o2, weights):
    return kernels.translate_sum_pair(f1.values, f1.lo, 1.0 / f1.spacing,
                                      f2.values, f2.lo, 1.0 / f2.spacing,
                                      centers, o1, o2, weights)


def _sup(candidates, evaluate, pts, grid, shape, meta, witness_fields):
    """Pointwise max of |evaluate(c, pts)| over candidates (first argmax kept)."""
    best = np.full(pts.shape[0], -np.inf)
    arg = np.zeros(pts.shape[0], dtype=np.int64)
    for ci, c in enumerate(candidates):
        v = evaluate(c, pts)
        better = v > best
        best[better] = v[better]
        arg[better] = ci
    witness = {"candidate": arg}
    for name, pos in witness_fields.items():
        witness[name] = np.asarray([c[pos] for c in candidates])[arg].reshape(shape)
    return OperatorOutput(best.reshape(shape), pts, grid, witness, meta, list(candidates), evaluate)


def _check_rule(f, rule):
    if rule.ambient_dim != f.dim:
        raise ValueError(f"rule lives on S^{rule.ambient_dim - 1} but f is {f.dim}-dimensional")


# -- linear -------------------------------------------------------------------

def spherical_average(f, t, u, rule, grid=None, at=None):
    """A^u_t f(x) = sum_i w_i f(x + t(u + y_i)); a GridFunction unless ``at``."""
    _check_rule(f, rule)
    if not t > 0:
        raise ValueError("t must be positive")
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.size != f.dim:
        raise ValueError("u has the wrong dimension")
    pts, g, shape = _targets(f, grid, at)
    vals = _tsum(f, pts, t * (u + rule.nodes), rule.weights)
    return vals if g is None else g.with_values(vals.reshape(shape))


def _cover_points(f, T):
    if T.dim != f.dim:
        raise ValueError(f"T lives in R^{T.dim}, f in R^{f.dim}")
    h = float(np.min(f.spacing))
    if T.resolution > h:
        raise ValueError(
            f"T resolution {T.resolution!r} is coarser than the grid spacing {h!r}; "
            "the sup over T is only certified at matching resolution")
    return covering_number(T, h).centers


def _shifted(base, shift):
    def ev(c, p):
        return np.abs(kernels.interp(base.values, base.lo, 1.0 / base.spacing, p + shift(c)))
    return ev


def maximal_over_set(f, T, t, rule, grid=None, at=None, method="direct"):
    """A^T_t f = sup over a spacing-cover of T of |A^u_t f|; witness u.

    ``method="shift"`` evaluates A^0_t f once on f's grid and uses
    A^u_t f(x) = A^0_t f(x + t u), interpolating the base average; this
    trades one extra interpolation for a |cover|-fold speed-up.
    """
    _check_rule(f, rule)
    us = _cover_points(f, T)
    pts, g, shape = _targets(f, grid, at)
    cands = [(i, 0.0) for i in range(len(us))]

    if method == "shift":
        base = spherical_average(f, t, np.zeros(f.dim), rule)
        ev = _shifted(base, lambda c: t * us[c[0]])
    elif method == "direct":
        def ev(c, p):
            return np.abs(_tsum(f, p, t * (us[c[0]] + rule.nodes), rule.weights))
    else:
        raise ValueError(f"unknown method {method!r}")

    out = _sup(cands, ev, pts, g, shape,
               {"operator": "A^T", "t": t, "cover_size": len(us), "method": method},
               {"u_index": 0})
    out.meta["u_nodes"] = us
    return out


def lacunary_maximal(f, T, rng, rule, grid=None, at=None):
    """sup over k in the range and u in a cover of T of |A^u_{2^k} f|."""
    _check_rule(f, rule)
    us = _cover_points(f, T)
    half = float(np.min((f.hi - f.lo) / 2.0))
    umax = float(np.max(np.linalg.norm(us, axis=1)))
    if 2.0**rng.k_max * (1.0 + umax) > half:
        raise ValueError(
            f"scale 2^{rng.k_max} with |u| <= {umax:.3g} leaves the box of half-width {half:.3g}")
    pts, g, shape = _targets(f, grid, at)
    cands = [(i, k) for k in rng.ks for i in range(len(us))]

    def ev(c, p):
        return np.abs(_tsum(f, p, 2.0 ** c[1] * (us[c[0]] + rule.nodes), rule.weights))

    out = _sup(cands, ev, pts, g, shape,
               {"operator": "N^T_lac", "k_min": rng.k_min, "k_max": rng.k_max,
                "cover_size": len(us)}, {"u_index": 0, "k": 1})
    out.meta["u_nodes"] = us
    return out


def _unit(u):
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError(f"u must be a unit vector, |u| = {np.linalg.norm(u)!r}")
    return u


def nikodym_average(f, u, ann, t=1.0, grid=None, at=None):
    """Normalised shell average sum_i w_i f(x + t(u + y_i)) over 1-delta<|y|<1+delta."""
    u = _unit(u)
    if ann.ambient_dim != f.dim:
        raise ValueError("annulus rule dimension differs from f")
    pts, g, shape = _targets(f, grid, at)
    vals = _tsum(f, pts, t * (u + ann.nodes), ann.weights)
    return vals if g is None else g.with_values(vals.reshape(shape))


def rule_spacing(rule):
    """Largest nearest-neighbour chord distance between nodes of a sphere rule."""
    if rule.ambient_dim == 2:
        return 2.0 * math.sin(rule.max_gap / 2.0)
    dist, _ = cKDTree(rule.nodes).query(rule.nodes, k=2)
    return float(np.max(dist[:, 1]))


def _check_u_rule(u_rule, delta, name="u_rule"):
    sp = rule_spacing(u_rule)
    if sp > delta:
        raise ValueError(f"{name} node spacing {sp:.4g} exceeds delta={delta!r}")


def nikodym_maximal(f, ann, u_rule, rng=None, grid=None, at=None, method="direct"):
    """N^delta f (or its lacunary version when ``rng`` is given).

    ``method="shift"`` averages once per scale at u = 0 on f's grid and
    interpolates the translates, as in :func:`maximal_over_set`."""
    if ann.ambient_dim != f.dim or u_rule.ambient_dim != f.dim:
        raise ValueError("rule dimensions must match f")
    _check_u_rule(u_rule, ann.delta)
    pts, g, shape = _targets(f, grid, at)
    ks = [0] if rng is None else rng.ks
    us = u_rule.nodes
    nodes, w = ann.nodes, ann.weights
    cands = [(i, k) for k in ks for i in range(len(us))]

    if method == "shift":
        bases = {k: GridFunction(f.lo, f.hi, _tsum(f, f.points(), 2.0**k * nodes, w).reshape(f.shape))
                 for k in ks}

        def ev(c, p):
            b = bases[c[1]]
            return np.abs(kernels.interp(b.values, b.lo, 1.0 / b.spacing, p + 2.0 ** c[1] * us[c[0]]))
    elif method == "direct":
        def ev(c, p):
            return np.abs(_tsum(f, p, 2.0 ** c[1] * (us[c[0]] + nodes), w))
    else:
        raise ValueError(f"unknown method {method!r}")

    out = _sup(cands, ev, pts, g, shape,
               {"operator": "N^delta" if rng is None else "N^delta_lac", "delta": ann.delta,
                "method": method},
               {"u_index": 0, "k": 1})
    out.meta["u_nodes"] = us
    return out


# -- bilinear -----------------------------------------------------------------

def _check_pair(f1, f2):
    if not f1.same_grid(f2):
        raise ValueError("f1 and f2 must share a grid")
    if f1.dim not in (1, 2, 3):
        raise ValueError(f"bilinear averages support d in {{1, 2, 3}}, got {f1.dim}")


def _bilinear_values(f1, f2, u, v, t, slicing, inner, pts):
    d = f1.dim
    if d == 1:
        o1 = t * (u + slicing.r[:, None])
        o2 = t * (v + slicing.z_scale[:, None])
        return _tsum_pair(f1, f2, pts, o1, o2, slicing.weights)
    total = np.zeros(pts.shape[0])
    for r, w, s in slicing:
        a1 = _tsum(f1, pts, t * (u + r * inner.nodes), inner.weights)
        if not np.any(a1):
            continue
        total += w * a1 * _tsum(f2, pts, t * (v + s * inner.nodes), inner.weights)
    return total


def bilinear_average(f1, f2, u, v, t, slicing, inner=None, grid=None, at=None):
    """int_{S^(2d-1)} f1(x + t(u+y)) f2(x + t(v+z)) dsigma(y, z) via slicing."""
    _check_pair(f1, f2)
    if slicing.d != f1.dim:
        raise ValueError("slicing rule dimension differs from f")
    if f1.dim > 1 and (inner is None or inner.ambient_dim != f1.dim):
        raise ValueError("an inner rule on S^(d-1) is required for d >= 2")
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    pts, g, shape = _targets(f1, grid, at)
    vals = _bilinear_values(f1, f2, u, v, t, slicing, inner, pts)
    return vals if g is None else g.with_values(vals.reshape(shape))


def bilinear_lacunary_maximal(f1, f2, T, rng, slicing, inner=None, grid=None, at=None,
                              budget=DEFAULT_PAIR_BUDGET):
    """sup over (u, v) in a cover of T and k in the range; witness (u, v, k)."""
    _check_pair(f1, f2)
    us = _cover_points(f1, T)
    pts, g, shape = _targets(f1, grid, at)
    cost = len(us) ** 2 * len(rng) * pts.shape[0]
    if cost > budget:
        raise ValueError(
            f"{len(us)}^2 pairs x {len(rng)} scales x {pts.shape[0]} points = {cost} "
            f"exceeds the budget {budget}")
    cands = [(i, j, k) for k in rng.ks for i in range(len(us)) for j in range(len(us))]

    def ev(c, p):
        return np.abs(_bilinear_values(f1, f2, us[c[0]], us[c[1]], 2.0 ** c[2],
                                       slicing, inner, p))

    out = _sup(cands, ev, pts, g, shape,
               {"operator": "bilinear N^T_lac", "k_min": rng.k_min, "k_max": rng.k_max,
                "cover_size": len(us)}, {"u_index": 0, "v_index": 1, "k": 2})
    out.meta["u_nodes"] = us
    return out


def _shell_pair_values(f1, f2, u, v, ann2d, pts, route, sliced):
    d = f1.dim
    if route == "direct":
        Y = ann2d.nodes
        return _tsum_pair(f1, f2, pts, u + Y[:, :d], v + Y[:, d:], ann2d.weights)
    slicing, inner = sliced
    total = np.zeros(pts.shape[0])
    for rho, w in zip(ann2d.radii, ann2d.radial_weights):
        total += w * _bilinear_values(f1, f2, u / rho, v / rho, rho, slicing, inner, pts)
    return total


def bilinear_nikodym(f1, f2, ann2d, u_rule, v_rule, grid=None, at=None,
                     route="direct", slicing_level=2, inner_level=3,
                     budget=DEFAULT_PAIR_BUDGET):
    """N^delta(f1, f2): sup over (u, v) nodes of the normalised 2d-shell average.

    ``route="direct"`` uses the shell rule on R^(2d); ``route="sliced"``
    integrates radially and slices each S^(2d-1) into products of S^(d-1)
    means (``slicing_level`` and ``inner_level`` set those rules).
    """
    _check_pair(f1, f2)
    d = f1.dim
    if ann2d.ambient_dim != 2 * d:
        raise ValueError(f"shell rule must live in R^{2 * d}")
    if u_rule.ambient_dim != d or v_rule.ambient_dim != d:
        raise ValueError("u and v rules must live on S^(d-1)")
    _check_u_rule(u_rule, ann2d.delta)
    _check_u_rule(v_rule, ann2d.delta, "v_rule")
    if route not in ("direct", "sliced"):
        raise ValueError(f"unknown route {route!r}")
    pts, g, shape = _targets(f1, grid, at)
    cost = len(u_rule) * len(v_rule) * pts.shape[0]
    if cost > budget:
        raise ValueError(f"{len(u_rule)} x {len(v_rule)} pairs x {pts.shape[0]} points "
                         f"= {cost} exceeds the budget {budget}")
    sliced = None
    if route == "sliced":
        sliced = (slicing_weights(d, slicing_level),
                  sphere_rule(d, inner_level) if d > 1 else None)
    U, V = u_rule.nodes, v_rule.nodes
    cands = [(i, j) for i in range(len(U)) for j in range(len(V))]

    def ev(c, p):
        return np.abs(_shell_pair_values(f1, f2, U[c[0]], V[c[1]], ann2d, p, route, sliced))

    out = _sup(cands, ev, pts, g, shape,
               {"operator": "bilinear N^delta", "delta": ann2d.delta, "route": route},
               {"u_index": 0, "v_index": 1})
    return out


def _support_cells(f):
    idx = np.flatnonzero(f.values.ravel())
    return f.points()[idx], f.values.ravel()[idx] * f.cell_volume


def bilinear_nikodym_support(f1, f2, delta, u_rule, v_rule, at):
    """N^delta(f1, f2) by cell sums over the supports of f1 and f2 with the
    shell indicator evaluated exactly:

        |S^delta|^-1 sum_{i,k} f1_i f2_k |cell|^2 1[1-delta < |(y_i-x-u, z_k-x-v)| < 1+delta].

    Suited to compactly supported, piecewise-constant inputs (the witness
    families); cost grows with the product of the support sizes only
    through a sort, not with the shell rule.
    """
    from .quadrature import shell_volume
    _check_pair(f1, f2)
    d = f1.dim
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    _check_u_rule(u_rule, delta)
    _check_u_rule(v_rule, delta, "v_rule")
    pts = np.atleast_2d(np.asarray(at, dtype=np.float64))
    P1, w1 = _support_cells(f1)
    P2, w2 = _support_cells(f2)
    if w1.size == 0 or w2.size == 0:
        raise ValueError("f1 and f2 must not vanish identically")
    lo2, hi2 = (1 - delta) ** 2, (1 + delta) ** 2
    norm = shell_volume(2 * d, delta)
    U, V = u_rule.nodes, v_rule.nodes
    M = pts.shape[0]
    span = 4.0 * (np.max(np.abs(P2)) + np.max(np.abs(pts)) + 2.0) ** 2
    row = (np.arange(M) * span)[:, None]

    def ev(c, p):
        a = np.sum((P1[None] - p[:, None] - U[c[0]]) ** 2, axis=2)
        b = np.sum((P2[None] - p[:, None] - V[c[1]]) ** 2, axis=2)
        order = np.argsort(b, axis=1, kind="stable")
        bs = (np.take_along_axis(b, order, axis=1) + row[:p.shape[0]]).ravel()
        ws = np.take_along_axis(np.broadcast_to(w2, b.shape), order, axis=1)
        cw = np.concatenate([np.zeros((b.shape[0], 1)), np.cumsum(ws, axis=1)], axis=1)
        r = row[:p.shape[0]]
        n2 = b.shape[1]
        first = (np.arange(p.shape[0]) * n2)[:, None]
        hi = np.searchsorted(bs, (hi2 - a + r).ravel(), side="left").reshape(a.shape)
        lo = np.searchsorted(bs, (lo2 - a + r).ravel(), side="right").reshape(a.shape)
        hi = np.clip(hi - first, 0, n2)
        lo = np.clip(lo - first, 0, n2)
        inner = np.take_along_axis(cw, np.maximum(hi, lo), axis=1) - np.take_along_axis(cw, lo, axis=1)
        return np.abs((inner * w1).sum(axis=1)) / norm

    cands = [(i, j) for i in range(len(U)) for j in range(len(V))]
    return _sup(cands, ev, pts, None, (M,),
                {"operator": "bilinear N^delta", "delta": delta, "route": "support"},
                {"u_index": 0, "v_index": 1})


def shell_lp_maximal(f, ann2d, u_rule, p, component=0, grid=None, at=None):
    """sup_u (normalised int over the 2d-shell of |f(x + u + y)|^p)^(1/p), where
    y is the ``component``-th R^d block of the shell variable.

    Uses the same nodes as :func:`bilinear_nikodym`, so discrete Hoelder
    holds exactly between the two."""
    d = f.dim
    if ann2d.ambient_dim != 2 * d:
        raise ValueError(f"shell rule must live in R^{2 * d}")
    Y = ann2d.nodes[:, component * d:(component + 1) * d]
    pts, g, shape = _targets(f, grid, at)
    U = u_rule.nodes
    best = np.zeros(pts.shape[0])
    for u in U:
        if p == 2:
            s = _tsum_pair(f, f, pts, u + Y, u + Y, ann2d.weights)
        else:
            vals = np.abs(kernels.interp(f.values, f.lo, 1.0 / f.spacing,
                                         (pts[:, None, :] + (u + Y)[None]).reshape(-1, d)))
            s = (vals.reshape(pts.shape[0], -1) ** p * ann2d.weights).sum(axis=1)
        np.maximum(best, np.maximum(s, 0.0) ** (1.0 / p), out=best)
    return best if g is None else g.with_values(best.reshape(shape))


# -- serialisation ------------------------------------------------------------

def write_output(path_prefix, out):
    """``<prefix>.bin`` holds the value grid (GridFunction layout);
    ``<prefix>_witness.csv`` lists x-index, u, v, k and value per point."""
    if out.grid is not None:
        write_grid(f"{path_prefix}.bin", out.value_grid)
    else:
        pts = out.points
        with open(f"{path_prefix}.bin", "wb") as fh:
            fh.write(struct.pack("<qq", -1, pts.shape[1]))
            fh.write(struct.pack("<q", pts.shape[0]))
            fh.write(np.ascontiguousarray(pts, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(out.values, dtype="<f8").ravel().tobytes())
    flat_vals = np.ravel(out.values)
    cols = {name: np.ravel(out.witness.get(name, np.full(flat_vals.size, -1)))
            for name in ("u_index", "v_index", "k")}
    with open(f"{path_prefix}_witness.csv", "w") as fh:
        fh.write("x_index,u,v,k,value\n")
        for m in range(flat_vals.size):
            fh.write(f"{m},{int(cols['u_index'][m])},{int(cols['v_index'][m])},"
                     f"{int(cols['k'][m])},{float(flat_vals[m])!r}\n")


def read_witness_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {"x_index": rows[:, 0].astype(int), "u": rows[:, 1].astype(int),
            "v": rows[:, 2].astype(int), "k": rows[:, 3].astype(int), "value": rows[:, 4]}

"""Grid-sampled functions, their L^p / Lorentz norms, the Hardy-Littlewood
maximal function, and witness constructors.

Grids are cell-centred on an axis-aligned box ``[lo, hi]`` (per-axis bounds
and sizes; cubes are the common case).  Off-grid evaluation is multilinear
and vanishes outside the box.
"""
from dataclasses import dataclass
import math
import struct

import numpy as np
from scipy import ndimage

from . import kernels
from .geomsets import CompactSet, cantor_set

MAX_CELLS = 1 << 26


@dataclass(frozen=True, eq=False)
class GridFunction:
    lo: np.ndarray
    hi: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        lo = np.atleast_1d(np.asarray(self.lo, dtype=np.float64)).copy()
        hi = np.atleast_1d(np.asarray(self.hi, dtype=np.float64)).copy()
        if lo.size == 1 and vals.ndim > 1:
            lo = np.full(vals.ndim, lo[0])
            hi = np.full(vals.ndim, hi[0])
        if lo.size != vals.ndim or hi.size != vals.ndim:
            raise ValueError("box bounds must match the number of array axes")
        if np.any(hi <= lo):
            raise ValueError("degenerate box")
        if min(vals.shape) < 2:
            raise ValueError("need at least 2 cells per axis")
        for arr in (vals, lo, hi):
            arr.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    @property
    def spacing(self):
        return (self.hi - self.lo) / np.asarray(self.shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axis_centers(self, axis):
        return self.lo[axis] + (np.arange(self.shape[axis]) + 0.5) * self.spacing[axis]

    def points(self):
        mesh = np.meshgrid(*[self.axis_centers(a) for a in range(self.dim)], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def with_values(self, values):
        return GridFunction(self.lo, self.hi, np.asarray(values).reshape(self.shape))

    def same_grid(self, other):
        return (self.shape == other.shape and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    def __call__(self, x):
        return eval_interp(self, x)


def _box(box, d=None):
    lo, hi = box
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    if d is not None and lo.size == 1:
        lo, hi = np.full(d, lo[0]), np.full(d, hi[0])
    return lo, hi


def empty_grid(box, n_per_axis, d=None):
    """Zero GridFunction on ``box``; ``n_per_axis`` is an int or a tuple."""
    lo, hi = _box(box, d if d is not None else np.size(n_per_axis) if np.ndim(n_per_axis) else None)
    shape = tuple(np.broadcast_to(np.asarray(n_per_axis, dtype=int), lo.shape).tolist())
    if math.prod(shape) > MAX_CELLS:
        raise ValueError(f"grid of {math.prod(shape)} cells exceeds the {MAX_CELLS} budget")
    return GridFunction(lo, hi, np.zeros(shape))


def sample(f, box, n_per_axis, d=None):
    """Cell-centred samples of a vectorised callable ``f((M, d) array) -> (M,)``."""
    if np.min(n_per_axis) < 2:
        raise ValueError("n_per_axis must be >= 2")
    g = empty_grid(box, n_per_axis, d)
    vals = np.asarray(f(g.points()), dtype=np.float64)
    return g.with_values(vals)


def eval_interp(g, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x.reshape(1, -1) if single else x
    out = kernels.interp(g.values, g.lo, 1.0 / g.spacing, pts)
    return float(out[0]) if single else out


def lp_norm(g, p):
    v = np.abs(g.values)
    if p == np.inf:
        return float(v.max())
    if not p > 0:
        raise ValueError("p must be positive")
    return float((np.sum(v**p) * g.cell_volume) ** (1.0 / p))


@dataclass(frozen=True)
class LorentzExponent:
    p: float
    r: float = np.inf

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("Lorentz exponent p must be >= 1")
        if not 1 <= self.r <= np.inf:
            raise ValueError("Lorentz exponent r must lie in [1, inf]")


@dataclass(frozen=True, eq=False)
class DistributionFunction:
    thresholds: np.ndarray
    measures: np.ndarray


def _levels(g):
    """Distinct |values| a_1 > ... > a_K > 0 and V_k = |{|g| >= a_k}|."""
    v = np.abs(g.values).ravel()
    v = v[v > 0]
    if v.size == 0:
        raise ValueError("function is identically zero")
    a, counts = np.unique(v, return_counts=True)
    a, counts = a[::-1], counts[::-1]
    return a, np.cumsum(counts) * g.cell_volume


def distribution(g, num_thresholds=64):
    """d_f(t) = |{|g| > t}| at geometric thresholds over [min |g| > 0, max |g|]."""
    a, V = _levels(g)
    t = np.geomspace(a[-1], a[0], num_thresholds) if a.size > 1 else np.array([a[0]])
    return DistributionFunction(t, measure_above(g, t))


def measure_above(g, t):
    """Exact d_f at arbitrary thresholds by cell counting."""
    v = np.sort(np.abs(g.values).ravel())
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    return (v.size - np.searchsorted(v, t, side="right")) * g.cell_volume


def layer_cake_integral(g):
    """int_0^inf d_f(t) dt evaluated exactly on the step distribution."""
    a, V = _levels(g)
    return float(np.sum(V * (a - np.append(a[1:], 0.0))))


def lorentz_norm(g, e):
    """Standard L^{p,r} quasinorm p^{1/r} (int_0^inf [t d_f(t)^{1/p}]^r dt/t)^{1/r},
    integrated exactly on the piecewise-constant distribution function."""
    a, V = _levels(g)
    p, r = float(e.p), float(e.r)
    if r == np.inf:
        return float(np.max(a * V ** (1.0 / p)))
    nxt = np.append(a[1:], 0.0)
    integral = np.sum(V ** (r / p) * (a**r - nxt**r)) / r
    return float(p ** (1.0 / r) * integral ** (1.0 / r))


HL_COMPARABILITY = 3.0  # dyadic cube sup vs continuum ball sup, up to dimension constants


def hl_maximal(g):
    """Centred maximal function: sup over the cell itself and cubes of
    half-width h*2^j (h = finest spacing) up to the box diameter."""
    v = np.abs(g.values)
    h = float(np.min(g.spacing))
    diam = float(np.linalg.norm(g.hi - g.lo))
    best = v.copy()
    r = h
    while r <= diam:
        size = [2 * max(1, int(round(r / hs))) + 1 for hs in g.spacing]
        avg = ndimage.uniform_filter(v, size=size, mode="constant", cval=0.0)
        np.maximum(best, avg, out=best)
        r *= 2.0
    return g.with_values(best)


def ball_indicator(d, rho, center=None):
    c = np.zeros(d) if center is None else np.asarray(center, dtype=np.float64)
    return lambda x: (np.sum((x - c) ** 2, axis=1) < rho * rho).astype(np.float64)


# -- counterexample for the restricted weak-type endpoint ---------------------

def nec_cantor_pair(s, depth, complementary=None):
    """Cantor sets C1 (ratio 2^{-1/s}) and C2 (ratio 2^{-1/(1-s)}).

    With ``complementary`` (default for s = 1/2) C1 uses the second map
    x/4 + 3/8 so that C2 - C1 = [-1/2, 1]; with the symmetric maps both sets
    have base-4 digits {0, 3} and C2 - C1 is itself a Cantor set.
    """
    lam1, lam2 = 2.0 ** (-1.0 / s), 2.0 ** (-1.0 / (1.0 - s))
    if complementary is None:
        complementary = s == 0.5
    if complementary and s != 0.5:
        raise ValueError("the complementary-digit pair is only available for s = 1/2")
    c2 = cantor_set(lam2, depth)
    c1 = cantor_set(lam1, depth, offset=(1.0 - lam1) / 2.0 if complementary else None)
    return c1, c2


def _dist_to_intervals(x, left, length):
    j = np.searchsorted(left, x, side="right") - 1
    out = np.full(x.shape, np.inf)
    for k in (j, j + 1):
        kk = np.clip(k, 0, left.size - 1)
        d = np.maximum(0.0, np.maximum(left[kk] - x, x - (left[kk] + length)))
        out = np.minimum(out, d)
    return out


def nec_counterexample(d, s, N, a=0.5, complementary=None, max_cells=MAX_CELLS):
    """f = sum_i 4^{(d-1)i} 1[dist(x, C2 e1) < a 4^{-i}] and T = C1 e1.

    The grid covers the support tightly with spacing <= a 4^{-N} / 4.
    """
    if d not in (2, 3):
        raise ValueError("nec_counterexample supports d in {2, 3}")
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    if not 1 <= N <= 6:
        raise ValueError("N must lie in [1, 6]")
    lam2 = 2.0 ** (-1.0 / (1.0 - s))
    for i in range(1, N + 1):
        if 2 * a * 4.0**-i >= lam2 ** (i - 1) * (1 - 2 * lam2):
            raise ValueError(f"a={a} too large: level-{i} balls bridge gaps of C2")
    h_target = a * 4.0**-N / 4.0
    lam_min = min(2.0 ** (-1.0 / s), lam2)
    depth = max(1, math.ceil(math.log(h_target / 4.0) / math.log(lam_min)))
    c1, c2 = nec_cantor_pair(s, depth, complementary)

    rho0 = a / 4.0
    margin = rho0 + 2 * h_target
    lo = np.full(d, -margin)
    hi = np.full(d, margin)
    hi[0] = 1.0 + margin
    shape = tuple(int(math.ceil((hi[k] - lo[k]) / h_target)) for k in range(d))
    cells = math.prod(shape)
    if cells > max_cells:
        raise ValueError(f"counterexample grid needs {cells} cells (> {max_cells})")
    hi = lo + np.asarray(shape) * h_target
    g = GridFunction(lo, hi, np.zeros(shape))
    c2_left = np.sort(c2.points[:, 0]) - c2.resolution / 2.0
    x1 = g.axis_centers(0)
    d1 = _dist_to_intervals(x1, c2_left, c2.resolution)
    perp2 = np.zeros(shape[1:])
    for k in range(1, d):
        c = g.axis_centers(k)
        perp2 = perp2 + (c.reshape([-1 if j == k - 1 else 1 for j in range(d - 1)]) ** 2)
    dist2 = d1.reshape((-1,) + (1,) * (d - 1)) ** 2 + perp2[None]
    vals = np.zeros(shape)
    for i in range(1, N + 1):
        rad = a * 4.0**-i
        vals += 4.0 ** ((d - 1) * i) * (dist2 < rad * rad)
    f = g.with_values(vals)
    Tpts = np.zeros((len(c1), d))
    Tpts[:, 0] = c1.points[:, 0]
    T = CompactSet(d, Tpts, c1.resolution, f"{c1.label} on e1")
    return f, T


# -- serialisation ------------------------------------------------------------

def write_grid(path, g):
    """Little-endian binary: int64 dim, float64 lo[d], float64 hi[d],
    int64 n[d], then row-major float64 values."""
    d = g.dim
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", d))
        fh.write(struct.pack(f"<{d}d", *g.lo))
        fh.write(struct.pack(f"<{d}d", *g.hi))
        fh.write(struct.pack(f"<{d}q", *g.shape))
        fh.write(np.ascontiguousarray(g.values, dtype="<f8").tobytes())


def read_grid(path):
    with open(path, "rb") as fh:
        (d,) = struct.unpack("<q", fh.read(8))
        lo = struct.unpack(f"<{d}d", fh.read(8 * d))
        hi = struct.unpack(f"<{d}d", fh.read(8 * d))
        shape = struct.unpack(f"<{d}q", fh.read(8 * d))
        vals = np.frombuffer(fh.read(), dtype="<f8")
    if vals.size != math.prod(shape):
        raise ValueError(f"{path}: payload has {vals.size} values, header says {math.prod(shape)}")
    return GridFunction(lo, hi, vals.reshape(shape))


def export_csv(path, g):
    pts = g.points()
    header = ",".join([f"x{k}" for k in range(g.dim)] + ["value"])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row, v in zip(pts, g.values.ravel()):
            fh.write(",".join(repr(float(c)) for c in row) + f",{float(v)!r}\n")

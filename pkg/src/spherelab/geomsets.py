"""Compact sets in R^d: Cantor iterates, embeddings, covers and set sums.

Every set is a finite point cloud together with a resolution ``h``: each point
of the ideal set lies within ``h`` of a stored point.  Covering claims are only
made at scales ``delta >= h``.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .fitting import FitResult, exponent_fit

MAX_CANTOR_DEPTH = 30
MAX_SUM_PAIRS = 1 << 26


@dataclass(frozen=True, eq=False)
class CompactSet:
    dim: int
    points: np.ndarray
    resolution: float
    label: str = ""

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if pts.size == 0:
            raise ValueError("a CompactSet needs at least one point")
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have {pts.shape[1]} coordinates, dim={self.dim}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class CoveringResult:
    delta: float
    count: int
    centers: np.ndarray


def cantor_set(lam, depth, offset=None):
    """Depth-``depth`` iterate of the two-map IFS x -> lam*x, lam*x + offset.

    ``offset`` defaults to ``1 - lam`` (attractor in [0, 1]); smaller offsets
    give an attractor in [0, offset/(1 - lam)].  The stored points are the
    midpoints of the 2**depth images of [0, 1], so the result is a
    ``lam**depth``-net of the attractor.
    """
    lam = float(lam)
    if not 0.0 < lam <= 0.5:
        raise ValueError(f"Cantor ratio must lie in (0, 1/2], got {lam}")
    if depth < 1 or depth > MAX_CANTOR_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_CANTOR_DEPTH}], got {depth}")
    off = 1.0 - lam if offset is None else float(offset)
    if offset is not None and not lam <= off <= 1.0 - lam:
        raise ValueError(f"offset {off} makes the two pieces overlap or leave [0, 1]")
    pts = np.array([0.5])
    for _ in range(depth):
        pts = np.concatenate([lam * pts, lam * pts + off])
    return CompactSet(1, pts[:, None], lam**depth,
                      f"cantor(lam={lam!r},depth={depth},offset={off!r})")


def interval_set(lo, hi, resolution):
    """A ``resolution``-net of the segment [lo, hi] in R^1."""
    if not hi > lo:
        raise ValueError("interval must satisfy hi > lo")
    n = max(1, math.ceil((hi - lo) / resolution))
    pts = lo + (np.arange(n) + 0.5) * ((hi - lo) / n)
    return CompactSet(1, pts[:, None], float(resolution), f"interval[{lo!r},{hi!r}]")


def singleton(point=(0.0,), resolution=1e-9):
    p = np.atleast_1d(np.asarray(point, dtype=np.float64))
    return CompactSet(p.size, p[None, :], resolution, f"singleton{tuple(p.tolist())}")


def product_embed(base, ambient_dim):
    """{0}^(d-m) x base inside R^d."""
    m = base.dim
    if ambient_dim < m:
        raise ValueError(f"ambient dimension {ambient_dim} < base dimension {m}")
    pts = np.zeros((len(base), ambient_dim))
    pts[:, ambient_dim - m:] = base.points
    return CompactSet(ambient_dim, pts, base.resolution,
                      f"embed{ambient_dim}({base.label})")


def covering_number(s, delta):
    """Greedy delta-net of ``s`` (lowest index first); centres are set points."""
    if delta < s.resolution:
        raise ValueError(
            f"delta={delta!r} is below the set resolution {s.resolution!r}; "
            "the discretisation cannot certify a cover at this scale")
    idx = kernels.greedy_net(s.points, float(delta))
    centers = s.points[idx]
    return CoveringResult(float(delta), int(idx.size), centers)


def minkowski_fit(s, delta_min, delta_max, num_scales):
    """Slope of log N(T, delta) against log(1/delta) on geometric scales."""
    if num_scales < 3:
        raise ValueError("num_scales must be at least 3")
    if not s.resolution <= delta_min < delta_max:
        raise ValueError(
            f"need resolution ({s.resolution!r}) <= delta_min ({delta_min!r}) < delta_max ({delta_max!r})")
    deltas = np.geomspace(delta_min, delta_max, num_scales)
    pts = [(1.0 / dl, covering_number(s, dl).count) for dl in deltas]
    return exponent_fit(pts)


def set_sum(a, b):
    """Minkowski sum of two subsets of R^1, deduplicated on a grid of
    spacing resolution/2 (the first sum landing in each cell is kept)."""
    if a.dim != 1 or b.dim != 1:
        raise ValueError("set_sum is only defined for subsets of R^1")
    if len(a) * len(b) > MAX_SUM_PAIRS:
        raise ValueError(f"{len(a)} x {len(b)} sums exceed the limit of {MAX_SUM_PAIRS}")
    res = a.resolution + b.resolution
    cell = res / 2.0
    sums = (a.points[:, 0][:, None] + b.points[:, 0][None, :]).ravel()
    _, first = np.unique(np.floor(sums / cell).astype(np.int64), return_index=True)
    kept = np.sort(sums[np.sort(first)])
    return CompactSet(1, kept[:, None], res, f"({a.label})+({b.label})")


def interval_cover_check(s, interval, tolerance):
    """True iff ``s`` is tolerance-dense in [lo, hi] and contained in its
    tolerance-neighbourhood."""
    if tolerance < s.resolution:
        raise ValueError(f"tolerance {tolerance!r} < resolution {s.resolution!r}")
    lo, hi = interval
    x = np.sort(s.points[:, 0])
    if x[0] < lo - tolerance or x[-1] > hi + tolerance:
        return False
    grid = lo + tolerance * np.arange(math.floor((hi - lo) / tolerance) + 1)
    grid = np.append(grid, hi)
    j = np.clip(np.searchsorted(x, grid), 1, x.size - 1)
    near = np.minimum(np.abs(grid - x[j - 1]), np.abs(grid - x[j]))
    if x.size == 1:
        near = np.abs(grid - x[0])
    return bool(np.all(near <= tolerance))


def largest_gap(s, interval):
    """Length of the longest stretch of [lo, hi] free of set points."""
    lo, hi = interval
    x = np.sort(s.points[:, 0])
    x = x[(x >= lo) & (x <= hi)]
    edges = np.concatenate([[lo], x, [hi]])
    return float(np.max(np.diff(edges)))


def write_set(path, s):
    label = s.label.replace("\n", " ")
    with open(path, "w") as fh:
        fh.write(f"# dim={s.dim} resolution={s.resolution!r} label={label}\n")
        for row in s.points:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_set(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# "):
            raise ValueError(f"{path}: missing '# dim=... resolution=... label=...' header")
        fields = header[2:].rstrip("\n")
        dim_part, rest = fields.split(" ", 1)
        res_part, label_part = rest.split(" ", 1)
        dim = int(dim_part.split("=", 1)[1])
        resolution = float(res_part.split("=", 1)[1])
        label = label_part.split("=", 1)[1]
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    return CompactSet(dim, np.asarray(rows).reshape(-1, dim), resolution, label)

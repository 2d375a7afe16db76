"""NumPy reference implementation of the hot kernels.

Used when the compiled extension is unavailable (or when ``SPHERELAB_PURE=1``).
Semantics are identical to ``_kernels.pyx``; results agree to rounding.

Interpolation convention (shared by both back ends): values are cell-centred
samples on the box ``[lo, lo + n*h]`` per axis.  A query point outside the
closed box evaluates to 0.  Inside, the multilinear interpolant of the two
nearest centres per axis is used, extrapolated linearly in the outer half
cells so that multilinear functions are reproduced exactly.
"""
import itertools

import numpy as np

_CHUNK = 1 << 18


def interp(values, lo, inv_h, points):
    values = np.asarray(values, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    d = values.ndim
    n = np.asarray(values.shape)
    s = (points - lo) * inv_h - 0.5
    inside = np.all((s >= -0.5) & (s <= n - 0.5), axis=1)
    i0 = np.clip(np.floor(s), 0, n - 2).astype(np.intp)
    w = s - i0
    out = np.zeros(points.shape[0])
    for corner in itertools.product((0, 1), repeat=d):
        wt = np.ones(points.shape[0])
        idx = []
        for a, c in enumerate(corner):
            wt = wt * (w[:, a] if c else 1.0 - w[:, a])
            idx.append(i0[:, a] + c)
        out += wt * values[tuple(idx)]
    out[~inside] = 0.0
    return out


def _center_mask(centers, lo, hi, rmin, rmax):
    # a sphere shell [rmin, rmax] around c can only meet the box if it
    # straddles the min/max distance from c to the box
    below = np.maximum(lo - centers, 0.0) + np.maximum(centers - hi, 0.0)
    dmin = np.sqrt(np.sum(below**2, axis=1))
    far = np.maximum(np.abs(centers - lo), np.abs(centers - hi))
    dmax = np.sqrt(np.sum(far**2, axis=1))
    return (dmin <= rmax) & (dmax >= rmin)


def translate_sum(values, lo, inv_h, centers, offsets, weights):
    """out[m] = sum_q weights[q] * f(centers[m] + offsets[q])."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    inv_h = np.asarray(inv_h, dtype=np.float64)
    hi = lo + np.asarray(values.shape) / inv_h
    radii = np.sqrt(np.sum(offsets**2, axis=1))
    out = np.zeros(centers.shape[0])
    active = np.flatnonzero(
        _center_mask(centers, lo, hi, radii.min(), radii.max()))
    if active.size == 0:
        return out
    q = offsets.shape[0]
    step = max(1, _CHUNK // max(q, 1))
    for start in range(0, active.size, step):
        sel = active[start:start + step]
        pts = (centers[sel, None, :] + offsets[None, :, :]).reshape(-1, centers.shape[1])
        vals = interp(values, lo, inv_h, pts).reshape(sel.size, q)
        out[sel] = (vals * weights).sum(axis=1)  # row-wise, independent of chunking
    return out


def translate_sum_pair(values1, lo1, inv_h1, values2, lo2, inv_h2,
                       centers, offsets1, offsets2, weights):
    """out[m] = sum_q w[q] * f1(c[m] + o1[q]) * f2(c[m] + o2[q])."""
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    offsets1 = np.asarray(offsets1, dtype=np.float64)
    offsets2 = np.asarray(offsets2, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    lo1 = np.asarray(lo1, dtype=np.float64)
    lo2 = np.asarray(lo2, dtype=np.float64)
    q = offsets1.shape[0]
    d = centers.shape[1]
    out = np.zeros(centers.shape[0])
    step = max(1, _CHUNK // max(q, 1))
    for start in range(0, centers.shape[0], step):
        c = centers[start:start + step]
        p1 = (c[:, None, :] + offsets1[None]).reshape(-1, d)
        p2 = (c[:, None, :] + offsets2[None]).reshape(-1, d)
        v1 = interp(values1, lo1, inv_h1, p1).reshape(c.shape[0], q)
        v2 = interp(values2, lo2, inv_h2, p2).reshape(c.shape[0], q)
        out[start:start + step] = (v1 * v2 * weights).sum(axis=1)
    return out


def greedy_net(points, delta):
    """Indices of a greedy delta-net, scanning points in index order."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n, d = points.shape
    d2 = delta * delta
    centers = np.empty((n, d))
    chosen = []
    k = 0
    for i in range(n):
        p = points[i]
        if k:
            diff = centers[:k] - p
            if np.min(np.einsum("ij,ij->i", diff, diff)) <= d2:
                continue
        centers[k] = p
        chosen.append(i)
        k += 1
    return np.asarray(chosen, dtype=np.intp)

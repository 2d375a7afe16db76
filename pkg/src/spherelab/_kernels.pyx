# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: translated quadrature sums over cell-centred grids.

Mirrors ``_kernels_py`` exactly in semantics (grids of dimension 1 to 3).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, fabs

cnp.import_array()

ctypedef cnp.float64_t f64


cdef struct Grid:
    const f64* data
    int d
    Py_ssize_t n[3]
    Py_ssize_t stride[3]
    double lo[3]
    double hi[3]
    double inv_h[3]


cdef Grid _make_grid(const f64[::1] flat, tuple shape, const f64[::1] lo,
                     const f64[::1] inv_h):
    cdef Grid g
    cdef int a
    g.data = &flat[0]
    g.d = len(shape)
    if g.d < 1 or g.d > 3:
        raise ValueError("compiled kernels support grids of dimension 1 to 3")
    for a in range(g.d):
        g.n[a] = shape[a]
        g.lo[a] = lo[a]
        g.inv_h[a] = inv_h[a]
        g.hi[a] = lo[a] + g.n[a] / inv_h[a]
    g.stride[g.d - 1] = 1
    for a in range(g.d - 2, -1, -1):
        g.stride[a] = g.stride[a + 1] * g.n[a + 1]
    return g


cdef inline double _interp(const Grid* g, const double* x) noexcept nogil:
    cdef Py_ssize_t i0[3]
    cdef double w[3]
    cdef double s, acc = 0.0, wt
    cdef int a, corner
    cdef Py_ssize_t off
    for a in range(g.d):
        s = (x[a] - g.lo[a]) * g.inv_h[a] - 0.5
        if s < -0.5 or s > g.n[a] - 0.5:
            return 0.0
        i0[a] = <Py_ssize_t>floor(s)
        if i0[a] < 0:
            i0[a] = 0
        elif i0[a] > g.n[a] - 2:
            i0[a] = g.n[a] - 2
        w[a] = s - i0[a]
    for corner in range(1 << g.d):
        wt = 1.0
        off = 0
        for a in range(g.d):
            if (corner >> (g.d - 1 - a)) & 1:
                wt = wt * w[a]
                off += (i0[a] + 1) * g.stride[a]
            else:
                wt = wt * (1.0 - w[a])
                off += i0[a] * g.stride[a]
        acc += wt * g.data[off]
    return acc


cdef inline bint _shell_meets_box(const Grid* g, const double* c,
                                  double rmin, double rmax) noexcept nogil:
    cdef double dmin = 0.0, dmax = 0.0, t, u
    cdef int a
    for a in range(g.d):
        t = 0.0
        if c[a] < g.lo[a]:
            t = g.lo[a] - c[a]
        elif c[a] > g.hi[a]:
            t = c[a] - g.hi[a]
        dmin += t * t
        t = fabs(c[a] - g.lo[a])
        u = fabs(c[a] - g.hi[a])
        if u > t:
            t = u
        dmax += t * t
    return sqrt(dmin) <= rmax and sqrt(dmax) >= rmin


def interp(values, lo, inv_h, points):
    cdef const f64[::1] flat = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef const f64[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const f64[::1] ih_v = np.ascontiguousarray(inv_h, dtype=np.float64)
    cdef Grid g = _make_grid(flat, np.shape(values), lo_v, ih_v)
    cdef const f64[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t m, M = p.shape[0]
    out = np.zeros(M)
    cdef f64[::1] o = out
    with nogil:
        for m in range(M):
            o[m] = _interp(&g, &p[m, 0])
    return out


def translate_sum(values, lo, inv_h, centers, offsets, weights):
    cdef const f64[::1] flat = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef const f64[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const f64[::1] ih_v = np.ascontiguousarray(inv_h, dtype=np.float64)
    cdef Grid g = _make_grid(flat, np.shape(values), lo_v, ih_v)
    cdef const f64[:, ::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const f64[:, ::1] off = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const f64[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m, q, M = c.shape[0], Q = off.shape[0]
    cdef int a, d = g.d
    cdef double x[3]
    cdef double acc, r, rmin = 1e300, rmax = 0.0
    if c.shape[1] != d or off.shape[1] != d:
        raise ValueError("dimension mismatch between grid and points")
    for q in range(Q):
        r = 0.0
        for a in range(d):
            r += off[q, a] * off[q, a]
        r = sqrt(r)
        if r < rmin:
            rmin = r
        if r > rmax:
            rmax = r
    out = np.zeros(M)
    cdef f64[::1] o = out
    with nogil:
        for m in range(M):
            if not _shell_meets_box(&g, &c[m, 0], rmin, rmax):
                continue
            acc = 0.0
            for q in range(Q):
                for a in range(d):
                    x[a] = c[m, a] + off[q, a]
                acc += w[q] * _interp(&g, x)
            o[m] = acc
    return out


def translate_sum_pair(values1, lo1, inv_h1, values2, lo2, inv_h2,
                       centers, offsets1, offsets2, weights):
    cdef const f64[::1] flat1 = np.ascontiguousarray(values1, dtype=np.float64).ravel()
    cdef const f64[::1] flat2 = np.ascontiguousarray(values2, dtype=np.float64).ravel()
    cdef const f64[::1] lo1_v = np.ascontiguousarray(lo1, dtype=np.float64)
    cdef const f64[::1] ih1_v = np.ascontiguousarray(inv_h1, dtype=np.float64)
    cdef const f64[::1] lo2_v = np.ascontiguousarray(lo2, dtype=np.float64)
    cdef const f64[::1] ih2_v = np.ascontiguousarray(inv_h2, dtype=np.float64)
    cdef Grid g1 = _make_grid(flat1, np.shape(values1), lo1_v, ih1_v)
    cdef Grid g2 = _make_grid(flat2, np.shape(values2), lo2_v, ih2_v)
    cdef const f64[:, ::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const f64[:, ::1] o1 = np.ascontiguousarray(offsets1, dtype=np.float64)
    cdef const f64[:, ::1] o2 = np.ascontiguousarray(offsets2, dtype=np.float64)
    cdef const f64[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m, q, M = c.shape[0], Q = o1.shape[0]
    cdef int a, d = g1.d
    cdef double x1[3]
    cdef double x2[3]
    cdef double acc, v1
    if g2.d != d or c.shape[1] != d:
        raise ValueError("dimension mismatch between grids and points")
    out = np.zeros(M)
    cdef f64[::1] o = out
    with nogil:
        for m in range(M):
            acc = 0.0
            for q in range(Q):
                for a in range(d):
                    x1[a] = c[m, a] + o1[q, a]
                    x2[a] = c[m, a] + o2[q, a]
                v1 = _interp(&g1, x1)
                if v1 != 0.0:
                    acc += w[q] * v1 * _interp(&g2, x2)
            o[m] = acc
    return out


def greedy_net(points, double delta):
    cdef const f64[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, j, k = 0
    cdef int a
    cdef double d2 = delta * delta, s, t
    cdef bint covered
    idx = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] iv = idx
    with nogil:
        for i in range(n):
            covered = False
            for j in range(k):
                s = 0.0
                for a in range(d):
                    t = p[iv[j], a] - p[i, a]
                    s += t * t
                if s <= d2:
                    covered = True
                    break
            if not covered:
                iv[k] = i
                k += 1
    return idx[:k].copy()

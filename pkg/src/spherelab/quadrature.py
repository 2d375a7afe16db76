"""Quadrature for the normalised surface measure on spheres, for thin
spherical shells, and for the polar slicing of S^(2d-1).

All rules are probability measures (weights sum to one).
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

SUPPORTED_SPHERES = (2, 3, 4, 6, 8)


@dataclass(frozen=True, eq=False)
class SphereRule:
    ambient_dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "deterministic"
    seed: int | None = None
    degree: int | None = None  # polynomial exactness; None for Monte Carlo

    def __len__(self):
        return self.weights.size

    def integrate(self, F):
        return float(np.sum(self.weights * F(self.nodes)))

    @property
    def max_gap(self):
        """Largest angular spacing for circle rules (used to certify sup over u)."""
        if self.ambient_dim != 2:
            raise ValueError("max_gap is only tabulated for circle rules")
        th = np.sort(np.mod(np.arctan2(self.nodes[:, 1], self.nodes[:, 0]), 2 * np.pi))
        return float(np.max(np.diff(np.append(th, th[0] + 2 * np.pi))))


def _circle(count):
    th = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(th), np.sin(th)]), np.full(count, 1.0 / count)


def _product_rule(n, m):
    # S^(n-1) = {(t, sqrt(1-t^2) w): w in S^(n-2)}, t-density (1-t^2)^((n-3)/2)
    if n == 2:
        return _circle(2 * m)
    a = (n - 3) / 2.0
    t, wt = roots_jacobi(m, a, a) if a else roots_legendre(m)
    wt = wt / wt.sum()
    inner, wi = _product_rule(n - 1, m)
    scale = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    nodes = np.concatenate(
        [np.column_stack([np.full(inner.shape[0], ti), si * inner]) for ti, si in zip(t, scale)])
    weights = np.concatenate([wi * w for w in wt])
    return nodes, weights


def sphere_rule(n, level, monte_carlo=False, seed=None):
    """Rule for the normalised surface measure on S^(n-1).

    n = 2: 64 * 2**level equispaced points.  n >= 3: product rule with
    m = 2**(level+1) Gauss-Jacobi nodes per polar angle and 2m equispaced
    azimuths, exact to degree 2m - 1.  ``monte_carlo=True`` draws
    4**level * 4096 uniform points from ``seed`` instead.
    """
    if n not in SUPPORTED_SPHERES:
        raise ValueError(f"unsupported sphere ambient dimension {n}; choose from {SUPPORTED_SPHERES}")
    if level < 1:
        raise ValueError("level must be >= 1")
    if monte_carlo:
        if seed is None:
            raise ValueError("Monte Carlo rules need an explicit seed")
        count = 4**level * 4096
        g = np.random.default_rng(seed).standard_normal((count, n))
        nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
        return SphereRule(n, nodes, np.full(count, 1.0 / count), "monte_carlo", seed, None)
    if n == 2:
        count = 64 * 2**level
        nodes, w = _circle(count)
        return SphereRule(2, nodes, w, degree=count - 1)
    m = 2 ** (level + 1)
    nodes, w = _product_rule(n, m)
    return SphereRule(n, nodes, w / w.sum(), degree=2 * m - 1)


def circle_rule(count):
    """Equispaced circle rule with an explicit node count."""
    nodes, w = _circle(int(count))
    return SphereRule(2, nodes, w, degree=int(count) - 1)


def unit_ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def shell_volume(n, delta):
    return unit_ball_volume(n) * ((1 + delta) ** n - (1 - delta) ** n)


@dataclass(frozen=True, eq=False)
class AnnulusRule:
    ambient_dim: int
    delta: float
    radii: np.ndarray
    radial_weights: np.ndarray
    sphere: SphereRule
    volume: float

    @property
    def nodes(self):
        return (self.radii[:, None, None] * self.sphere.nodes[None]).reshape(-1, self.ambient_dim)

    @property
    def weights(self):
        return (self.radial_weights[:, None] * self.sphere.weights[None]).ravel()

    def integrate(self, F):
        return float(np.sum(self.weights * F(self.nodes)))


def annulus_rule(n, delta, level, seed=0, monte_carlo=False, radial_nodes=None):
    """Normalised rule for the shell 1 - delta < |y| < 1 + delta in R^n."""
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    q = radial_nodes or 2 ** (level + 1)
    x, w = roots_legendre(q)
    r = 1.0 + delta * x
    w = w * r ** (n - 1)
    sph = sphere_rule(n, level, monte_carlo=monte_carlo, seed=seed if monte_carlo else None)
    return AnnulusRule(n, float(delta), r, w / w.sum(), sph, shell_volume(n, delta))


@dataclass(frozen=True, eq=False)
class SlicingRule:
    """Nodes for  int_{S^(2d-1)} F dsigma = sum_i w_i mean F over
    S^(d-1)(r_i) x S^(d-1)(s_i).  For d = 1 the pairs (r_i, s_i) are
    (cos t_i, sin t_i) on an equispaced angle grid and the inner means are
    trivial."""
    d: int
    r: np.ndarray
    weights: np.ndarray
    z_scale: np.ndarray

    def __iter__(self):
        return iter(zip(self.r.tolist(), self.weights.tolist(), self.z_scale.tolist()))

    def __len__(self):
        return self.r.size


def slicing_weights(d, level):
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        count = 128 * 2**level
        th = 2.0 * np.pi * np.arange(count) / count
        return SlicingRule(1, np.cos(th), np.full(count, 1.0 / count), np.sin(th))
    # |y|^2 = b ~ Beta(d/2, d/2): radial density r^(d-1) (1-r^2)^((d-2)/2)
    m = 4 * 2**level
    a = d / 2.0 - 1.0
    x, w = roots_jacobi(m, a, a) if a else roots_legendre(m)
    b = (x + 1.0) / 2.0
    return SlicingRule(d, np.sqrt(b), w / w.sum(), np.sqrt(1.0 - b))


def integrate_sliced(slicing, inner, F):
    """Evaluate int_{S^(2d-1)} F(y, z) dsigma via a slicing rule.

    ``F`` takes arrays y, z of shape (K, d) and returns K values.
    """
    if slicing.d == 1:
        y = slicing.r[:, None]
        z = slicing.z_scale[:, None]
        return float(np.sum(slicing.weights * F(y, z)))
    if inner.ambient_dim != slicing.d:
        raise ValueError("inner rule must live on S^(d-1)")
    q = len(inner)
    ya = np.repeat(inner.nodes, q, axis=0)
    zb = np.tile(inner.nodes, (q, 1))
    wab = np.outer(inner.weights, inner.weights).ravel()
    total = 0.0
    for r, w, s in slicing:
        total += w * float(np.sum(wab * F(r * ya, s * zb)))
    return total


def integrate_direct(rule, F):
    """Evaluate int_{S^(2d-1)} F(y, z) dsigma with a rule on S^(2d-1)."""
    d = rule.ambient_dim // 2
    return float(np.sum(rule.weights * F(rule.nodes[:, :d], rule.nodes[:, d:])))


def integrate_sliced_product(slicing, inner, g1, g2):
    """Sliced evaluation of int g1(y) g2(z) dsigma(y, z) for separable
    integrands: a weighted sum of products of inner spherical means."""
    if slicing.d == 1:
        return float(np.sum(slicing.weights * g1(slicing.r[:, None]) * g2(slicing.z_scale[:, None])))
    total = 0.0
    for r, w, s in slicing:
        total += w * inner.integrate(lambda y: g1(r * y)) * inner.integrate(lambda z: g2(s * z))
    return total

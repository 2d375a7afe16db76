"""Littlewood-Paley partition, band projections, and radial Fourier profiles
of surface and shell measures.

Fourier convention ``two_pi``: f^(xi) = int f(x) exp(-2 pi i x.xi) dx.  The
``plain`` convention drops the 2 pi from the exponent.
"""
from dataclasses import dataclass
from importlib import resources
import math

import numpy as np
from scipy.special import gamma, roots_legendre

from .fields import GridFunction
from .quadrature import shell_volume

CONVENTIONS = ("two_pi", "plain")
BESSEL_CROSSOVER = 12.0  # series below, Hankel asymptotics above
_SERIES_TERMS = 80
_ASYMPTOTIC_TERMS = 30
BOUNDARY_TOLERANCE = 1e-8


# -- Bessel functions ---------------------------------------------------------

def _bessel_series(nu, x):
    # sum_k (-1)^k (x/2)^(2k+nu) / (k! Gamma(k+nu+1)); rounding ~ eps * e^x / x
    h = x / 2.0
    term = h**nu / math.gamma(nu + 1.0)
    total = term.copy()
    q = -h * h
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _bessel_asymptotic(nu, x):
    # Hankel: J = sqrt(2/(pi x)) (P cos w - Q sin w), w = x - nu pi/2 - pi/4
    mu = 4.0 * nu * nu
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    a = np.ones_like(x)
    prev = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 2 * _ASYMPTOTIC_TERMS):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        # the series diverges: stop each element at its smallest term
        active &= np.abs(a) <= np.abs(prev)
        prev = a
        t = np.where(active, a, 0.0)
        if k % 2:
            Q += t if (k // 2) % 2 == 0 else -t
        else:
            P += -t if (k // 2) % 2 else t
        if not np.any(active & (np.abs(a) > 1e-17)):
            break
    w = x - (nu / 2.0 + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(w) - Q * np.sin(w))


def bessel_j(nu, x):
    """J_nu(x) for nu >= 0 and x >= 0.

    Power series for x <= BESSEL_CROSSOVER, Hankel's asymptotic expansion
    (truncated at its smallest term) beyond.  The crossover equates the
    series cancellation loss, about eps * e^x / x, with the asymptotic
    remainder, about e^(-2x); both are near 1e-12 at x = 12 for orders up to 2.
    """
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise ValueError("bessel_j is defined here for x >= 0")
    out = np.empty_like(x)
    small = x <= BESSEL_CROSSOVER
    if np.any(small):
        out[small] = _bessel_series(float(nu), x[small])
    if np.any(~small):
        out[~small] = _bessel_asymptotic(float(nu), x[~small])
    return float(out[0]) if scalar else out


# -- partition of unity -------------------------------------------------------

TRANSITIONS = ("poly4", "quintic", "smooth")


def _smooth_step(t, transition):
    t = np.clip(t, 0.0, 1.0)
    if transition in ("poly4", "quintic"):
        # S(t) = 1 - S(1 - t): evaluate the lower half only, avoiding cancellation near 1
        lo = np.minimum(t, 1.0 - t)
        if transition == "poly4":  # degree-9 smoothstep, C^4 at both ends
            v = lo**5 * (126.0 + lo * (-420.0 + lo * (540.0 + lo * (-315.0 + 70.0 * lo))))
        else:
            v = lo**3 * (10.0 - 15.0 * lo + 6.0 * lo * lo)
        return np.where(t <= 0.5, v, 1.0 - v)
    if transition == "smooth":
        with np.errstate(divide="ignore", over="ignore"):
            a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
            b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        return a / (a + b)
    raise ValueError(f"unknown transition {transition!r}; choose from {TRANSITIONS}")


def phi_hat(xi_abs, transition="poly4"):
    """Radial low-pass: 1 on |xi| <= 1, 0 on |xi| >= 2, smooth step in log2|xi|."""
    r = np.asarray(xi_abs, dtype=np.float64)
    with np.errstate(divide="ignore"):
        t = np.where(r > 0, np.log2(np.where(r > 0, r, 1.0)), -1.0)
    return 1.0 - _smooth_step(t, transition)


@dataclass(frozen=True)
class DyadicBand:
    j: int
    transition: str = "poly4"

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("band index must be >= 0")
        _smooth_step(0.5, self.transition)

    @property
    def support(self):
        return (0.0, 2.0) if self.j == 0 else (2.0 ** (self.j - 1), 2.0 ** (self.j + 1))

    def __call__(self, xi_abs):
        r = np.asarray(xi_abs, dtype=np.float64)
        if self.j == 0:
            return phi_hat(r, self.transition)
        return (phi_hat(2.0**-self.j * r, self.transition)
                - phi_hat(2.0 ** (1 - self.j) * r, self.transition))


def build_partition(J, transition="poly4"):
    """[phi^, psi^_{2^-1}, ..., psi^_{2^-J}]; their sum is phi^(2^-J xi)."""
    if J < 1:
        raise ValueError("J must be >= 1")
    return [DyadicBand(j, transition) for j in range(J + 1)]


def partition_sum(bands, xi_abs):
    return sum(b(xi_abs) for b in bands)


# -- band projection ----------------------------------------------------------

def _boundary_max(values):
    m = 0.0
    for ax in range(values.ndim):
        m = max(m, float(np.max(np.abs(np.take(values, [0, -1], axis=ax)))))
    return m


def frequency_magnitude(g):
    freqs = [np.fft.fftfreq(n, h) for n, h in zip(g.shape, g.spacing)]
    mesh = np.meshgrid(*freqs, indexing="ij")
    return np.sqrt(sum(m * m for m in mesh))


def band_project(g, band, check_boundary=True):
    """Apply the radial multiplier ``band`` through the discrete Fourier
    transform of the (periodised) grid."""
    if check_boundary:
        peak = float(np.max(np.abs(g.values)))
        edge = _boundary_max(g.values)
        if edge >= BOUNDARY_TOLERANCE * peak:
            raise ValueError(
                f"boundary values reach {edge:.3e} (> {BOUNDARY_TOLERANCE} x max {peak:.3e}); "
                "the grid is not safely periodisable")
    spec = np.fft.fftn(g.values) * band(frequency_magnitude(g))
    out = np.fft.ifftn(spec)
    return g.with_values(out.real)


# -- radial profiles ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialProfile:
    radii: np.ndarray
    values: np.ndarray
    convention: str

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        r = np.asarray(self.radii, dtype=np.float64)
        if r.ndim != 1 or np.any(np.diff(r) <= 0):
            raise ValueError("profile radii must be strictly increasing")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", np.asarray(self.values))

    def _coerce(self, other):
        if isinstance(other, RadialProfile):
            if other.convention != self.convention:
                raise TypeError(f"cannot combine {self.convention} and {other.convention} profiles")
            if not np.array_equal(other.radii, self.radii):
                raise ValueError("profiles live on different radial grids")
            return other.values
        return other

    def __add__(self, other):
        return RadialProfile(self.radii, self.values + self._coerce(other), self.convention)

    def __sub__(self, other):
        return RadialProfile(self.radii, self.values - self._coerce(other), self.convention)

    def __mul__(self, other):
        return RadialProfile(self.radii, self.values * self._coerce(other), self.convention)

    __rmul__ = __mul__


def _freq_scale(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    return 2.0 * math.pi if convention == "two_pi" else 1.0


def annulus_hat_raw(delta, d, xi_abs, convention="two_pi"):
    """[(1+delta)^(d/2) J_{d/2}(c(1+delta)|xi|) - (1-delta)^(d/2) J_{d/2}(c(1-delta)|xi|)]
    / |xi|^(d/2), with c = 2 pi (two_pi) or 1 (plain); no constant."""
    r = np.asarray(xi_abs, dtype=np.float64)
    c = _freq_scale(convention)
    hi, lo = 1.0 + delta, 1.0 - delta
    return (hi ** (d / 2) * bessel_j(d / 2, c * hi * r)
            - lo ** (d / 2) * bessel_j(d / 2, c * lo * r)) / r ** (d / 2)


def _read_golden():
    text = resources.files("spherelab").joinpath("data/kappa.txt").read_text()
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            key, val = line.split("=", 1)
            out[key.strip()] = float(val)
    return out


def kappa(d, convention="two_pi"):
    key = f"kappa_d{d}_{convention}"
    table = _read_golden()
    if key not in table:
        raise KeyError(f"no calibrated constant {key} in the golden file")
    return table[key]


def annulus_hat(delta, d, xi_abs, convention="two_pi"):
    """Fourier transform of the indicator of 1-delta < |x| < 1+delta at |xi|."""
    if d not in (2, 3, 4):
        raise ValueError("annulus_hat supports d in {2, 3, 4}")
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    r = np.asarray(xi_abs, dtype=np.float64)
    if np.any(r <= 0):
        raise ValueError("xi_abs must be positive; the value at 0 is the shell volume")
    return kappa(d, convention) * annulus_hat_raw(delta, d, r, convention)


def sampled_annulus_transform(delta, d, n, half_width=1.5):
    """Discrete transform of the cell-centred sampled shell indicator on
    [-half_width, half_width]^d with n cells per axis (two_pi convention).

    Returns (|xi| per lattice frequency, transform values), both flattened.
    """
    h = 2.0 * half_width / n
    c = -half_width + (np.arange(n) + 0.5) * h
    mesh = np.meshgrid(*([c] * d), indexing="ij", sparse=True)
    rr = np.sqrt(sum(m * m for m in mesh))
    ind = ((rr > 1 - delta) & (rr < 1 + delta)).astype(np.float64)
    F = np.fft.fftn(ind) * h**d
    k = np.fft.fftfreq(n, h)
    kmesh = np.meshgrid(*([k] * d), indexing="ij", sparse=True)
    phase = np.exp(-2j * math.pi * sum(km * c[0] for km in kmesh))
    F = F * phase
    kabs = np.sqrt(sum(km * km for km in kmesh))
    kabs = np.broadcast_to(kabs, F.shape)
    return kabs.ravel(), F.real.ravel()


def calibrate_kappa(d, convention="two_pi", delta=0.1, n=None, ref_xi=None):
    """kappa(d) = sampled transform / closed form at a reference frequency.

    The reference is the lattice frequency nearest to 0.5 (two_pi units),
    which is far from the zeros of the profile."""
    n = n or {2: 4096, 3: 256, 4: 64}[d]
    kabs, F = sampled_annulus_transform(delta, d, n)
    target = 0.5 if ref_xi is None else ref_xi
    i = int(np.argmin(np.abs(kabs - target) + (kabs == 0) * 1e9))
    xi = kabs[i]
    c = _freq_scale(convention)
    return float(F[i] / annulus_hat_raw(delta, d, xi * 2 * math.pi / c, convention))


def fourier_decay_functional(delta, d=2, eps=0.1, xi_max=64.0, samples=20000):
    """sup_{1<=|xi|<=xi_max} |chi^(xi)| / |S^delta| (1+|xi|)^((d-1)/2+eps) delta^eps."""
    xi = np.linspace(1.0, xi_max, samples)
    vals = np.abs(annulus_hat(delta, d, xi)) / shell_volume(d, delta)
    return float(np.max(vals * (1 + xi) ** ((d - 1) / 2 + eps) * delta**eps))


def sigma_hat(d, xi_abs):
    """Transform of the normalised surface measure on S^(d-1), two_pi convention:
    Gamma(d/2) (pi|xi|)^(1-d/2) J_{d/2-1}(2 pi |xi|), equal to 1 at 0."""
    if d < 2:
        raise ValueError("sigma_hat needs d >= 2")
    r = np.atleast_1d(np.asarray(xi_abs, dtype=np.float64))
    out = np.ones_like(r)
    nz = r > 0
    out[nz] = (gamma(d / 2) * (math.pi * r[nz]) ** (1 - d / 2)
               * bessel_j(d / 2 - 1, 2 * math.pi * r[nz]))
    return float(out[0]) if np.ndim(xi_abs) == 0 else out


def sigma_hat_profile(d, xi_grid):
    return RadialProfile(np.asarray(xi_grid), sigma_hat(d, xi_grid), "two_pi")


# -- psi * sigma --------------------------------------------------------------

def _radial_inverse(F, lo, hi, d, r, panels, order=16):
    # f(r) = 2 pi r^(1-d/2) int F(rho) J_{d/2-1}(2 pi r rho) rho^(d/2) drho
    x, w = roots_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    rho = (mid[:, None] + half[:, None] * x[None]).ravel()
    wr = (half[:, None] * w[None]).ravel() * F(rho) * rho ** (d / 2)
    nu = d / 2 - 1
    out = np.empty_like(r)
    zero = r == 0
    # limit at the origin: J_nu(z) / z^nu -> 1 / (2^nu Gamma(nu+1))
    out[zero] = 2 * math.pi * math.pi**nu / math.gamma(nu + 1) * np.sum(wr * rho**nu)
    idx = np.flatnonzero(~zero)
    step = max(1, (1 << 21) // rho.size)
    for s in range(0, idx.size, step):
        sel = idx[s:s + step]
        J = bessel_j(nu, (2 * math.pi * r[sel, None] * rho[None]).ravel()).reshape(sel.size, -1)
        out[sel] = 2 * math.pi * r[sel] ** (1 - d / 2) * (J @ wr)
    return out


def kernel_psi_sigma(j, d, x_abs_grid, transition="poly4", tol=1e-8, max_panels=1 << 14):
    """Radial profile of psi_{2^-j} * sigma (sigma normalised on S^(d-1)).

    Gauss-Legendre panels (order 16) over the band support; the panel count
    doubles until successive results differ by less than ``tol`` times the
    profile maximum.
    """
    if not 1 <= j <= 10:
        raise ValueError("j must lie in [1, 10]")
    if d not in (2, 3):
        raise ValueError("kernel_psi_sigma supports d in {2, 3}")
    r = np.asarray(x_abs_grid, dtype=np.float64)
    band = DyadicBand(j, transition)
    lo, hi = band.support
    F = lambda rho: band(rho) * sigma_hat(d, rho)
    # start with about one panel per oscillation at the largest radius
    panels = max(8, int(math.ceil((hi - lo) * max(1.0, float(np.max(r))) * 2)))
    prev = _radial_inverse(F, lo, hi, d, r, panels)
    while True:
        panels *= 2
        if panels > max_panels:
            raise RuntimeError("radial inversion did not converge")
        cur = _radial_inverse(F, lo, hi, d, r, panels)
        if np.max(np.abs(cur - prev)) < tol * max(np.max(np.abs(cur)), 1e-300):
            return RadialProfile(r, cur, "two_pi")
        prev = cur


def decay_constant(profile, j, N=4):
    """sup_r |K_j(r)| (1 + 2^j |r - 1|)^N / 2^j."""
    return float(np.max(np.abs(profile.values) * (1 + 2.0**j * np.abs(profile.radii - 1)) ** N / 2.0**j))


def write_golden(path, delta=0.1):
    """Recompute every kappa(d, convention) and the Bessel crossover and
    write them as key=value lines with 17 significant digits."""
    lines = ["# calibrated Fourier constants (sampled shell indicator, delta=0.1)",
             f"bessel_crossover={BESSEL_CROSSOVER:#.17g}"]
    for d in (2, 3, 4):
        for conv in CONVENTIONS:
            lines.append(f"kappa_d{d}_{conv}={calibrate_kappa(d, conv, delta=delta):#.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

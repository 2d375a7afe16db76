"""Log-log power-law fits."""
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_residual: float
    points: list = field(default_factory=list)  # (log x, log y)


def exponent_fit(points):
    """Ordinary least squares of log y against log x.

    ``points`` is a sequence of ``(x, y)`` with both coordinates positive.
    At least three points with distinct abscissae are required.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if pts.shape[0] < 3:
        raise ValueError(f"need at least 3 points for a slope, got {pts.shape[0]}")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("exponent_fit needs strictly positive finite values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.unique(lx).size < 2 or np.ptp(lx) == 0:
        raise ValueError("degenerate abscissa: all x values coincide")
    if np.unique(lx).size != lx.size:
        raise ValueError("degenerate abscissa: repeated x values")
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return FitResult(float(slope), float(intercept), float(np.max(np.abs(resid))),
                     [(float(a), float(b)) for a, b in zip(lx, ly)])

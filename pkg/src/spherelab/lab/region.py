"""Exponent-region geometry in rational arithmetic.

Points are (1/p, 1/q) for the linear operator and (1/p1, 1/p2) for the
bilinear one.  All coordinates are :class:`fractions.Fraction`.
"""
from dataclasses import dataclass
from fractions import Fraction


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class RegionVertices:
    d: int
    s: Fraction
    H: tuple
    E: tuple
    P: tuple
    Q: tuple | None = None
    R: tuple | None = None


def _h_min(d, s):
    if d == 2:
        return s
    if d == 3:
        return min(s / 2, 1 / (3 - s), (5 - 2 * s) / (9 - 4 * s))
    return min(s / (d - 1), 1 / (d - s), (d - s) / (3 * (d - s) - 2))


def region_vertices(d, s):
    """Vertices H, E of the L^p-improving triangle and P, Q, R of the
    bilinear region, for d >= 2 and 0 < s <= d - 1 (the formulas extend
    continuously to the endpoint s = d - 1, where the theorems are silent)."""
    s = _frac(s)
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0 < s <= d - 1:
        raise ValueError(f"s must lie in (0, {d - 1}], got {s}")
    h = 1 / (1 + _h_min(d, s))
    E = ((d - s) / (d - s + 1), 1 / (d - s + 1))
    pc = Fraction(d - 1) / (d - 1 + s)
    Q = R = None
    if d >= 3 and s < d - 2:
        qc = (d - s - 1) / (d - s)
        Q, R = (Fraction(1), qc), (qc, Fraction(1))
    return RegionVertices(d, s, (h, h), E, (pc, pc), Q, R)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _in_hull(point, vertices, closed):
    hull = _hull(vertices)
    pt = (_frac(point[0]), _frac(point[1]))
    for a, b in zip(hull, hull[1:] + hull[:1]):
        c = _cross(a, b, pt)
        if c < 0 or (c == 0 and not closed):
            return False
    return True


def _on_segment(pt, a, b):
    if _cross(a, b, pt) != 0:
        return False
    return (min(a[0], b[0]) <= pt[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= pt[1] <= max(a[1], b[1]))


def in_delta(v, point):
    """Closed triangle with vertices A = (0, 0), H and E."""
    return _in_hull(point, [(Fraction(0), Fraction(0)), v.H, v.E], closed=True)


def strong_type(v, point):
    """Membership in the strong-type set: the triangle minus {E, H}, or
    minus the whole segment [E, H] when d = 3, s > 3/2 or d >= 4, s > d - 2."""
    pt = (_frac(point[0]), _frac(point[1]))
    if not in_delta(v, pt):
        return False
    if (v.d == 3 and v.s > Fraction(3, 2)) or (v.d >= 4 and v.s > v.d - 2):
        return not _on_segment(pt, v.E, v.H)
    return pt not in (v.E, v.H)


def restricted_weak_type(v, point):
    """Endpoints where only the L^{p,1} -> L^{q,inf} bound is asserted."""
    pt = (_frac(point[0]), _frac(point[1]))
    if pt == v.E:
        return True
    late = (v.d == 3 and v.s > Fraction(3, 2)) or (v.d >= 4 and v.s > v.d - 2)
    return pt == v.H and not late


def in_omega(v, point):
    """Open convex hull of {O, A, P, B}, enlarged by Q and R when present."""
    O, A, B = (Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))
    pts = [O, A, v.P, B] + ([v.Q, v.R] if v.Q is not None else [])
    return _in_hull(point, pts, closed=False)


def sharpness_E_exponent(d, s, p, q):
    """d/((d-1)p) - (1-s)/((d-1)q) - 1: positive means blow-up for balls."""
    d, s, ip, iq = Fraction(d), _frac(s), 1 / _frac(p), 1 / _frac(q)
    return d * ip / (d - 1) - (1 - s) * iq / (d - 1) - 1

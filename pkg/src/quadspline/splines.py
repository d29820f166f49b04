"""Univariate local spline interpolation on non-uniform knots.

A curve through points p_0..p_N is built as F(x) = sum_i p_i * psi_i(x) where
the basis functions psi_i are compactly supported piecewise polynomials with
psi_i(x_j) = delta_ij.  Two families with support width 4 are provided:

    d3c1p2s4  cubic, C1, reproduces quadratics (the classical non-uniform
              Catmull-Rom basis)
    d5c2p2s4  quintic, C2, reproduces quadratics

On a knot interval [x_s, x_{s+1}] exactly four basis functions are nonzero and
each depends only on the three interval lengths (d_{s-1}, d_s, d_{s+1}).  The
segment polynomials are evaluated from expanded monomial coefficients so that
derivatives of any order are exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEdgeError

# offsets of the nonzero basis functions on a segment, for support width 4
SUPPORT_OFFSETS = (-1, 0, 1, 2)

_X_TOL = 1e-9  # relative slack for the x-in-segment domain check


@dataclass(frozen=True)
class SplineFamily:
    """Descriptor of one basis-function class.

    degree/continuity/reproduction/support are the class parameters: curves
    built on the family are piecewise degree-`degree` polynomials, C^continuity
    at the knots, reproduce polynomials up to degree `reproduction`, and each
    basis function spans `support` knot intervals.
    """

    name: str
    degree: int
    continuity: int
    reproduction: int
    support: int

    def __post_init__(self):
        if self.support % 2 != 0 or self.support < 4:
            raise ValueError("support width must be even and >= 4")


D3C1P2S4 = SplineFamily("d3c1p2s4", 3, 1, 2, 4)
D5C2P2S4 = SplineFamily("d5c2p2s4", 5, 2, 2, 4)

FAMILIES = {D3C1P2S4.name: D3C1P2S4, D5C2P2S4.name: D5C2P2S4}


def family(name):
    """Look up a family by its id string (case-insensitive)."""
    try:
        return FAMILIES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown spline family {name!r}; "
                         f"choose from {sorted(FAMILIES)}") from None


def _coeffs_all_d3(dm, d0, dp):
    # monomial coefficients (ascending powers of x) on [0, d0], offsets -1..2
    inv0 = 1.0 / d0
    inv0sq = inv0 * inv0
    a = 1.0 / (d0 + dp)
    b = 1.0 / dm
    c = 1.0 / (dm + d0)
    e = 1.0 / dp
    q1 = b * c  # 1 / (dm (dm + d0))
    q2 = e * a  # 1 / (dp (d0 + dp))
    return (
        (0.0, -d0 * q1, 2.0 * q1, -q1 * inv0),
        (1.0, b - inv0, -(a + 2.0 * b) * inv0, (a + b) * inv0sq),
        (0.0, c * dm * inv0, (2.0 * c + e) * inv0, -(c + e) * inv0sq),
        (0.0, 0.0, -q2, q2 * inv0),
    )


def _coeffs_all_d5(dm, d0, dp):
    inv0 = 1.0 / d0
    inv0sq = inv0 * inv0
    inv03 = inv0sq * inv0
    inv04 = inv0sq * inv0sq
    q = 1.0 / (dm * (dm + d0)) * inv03  # 1 / (dm d0^3 (dm + d0))
    p = d0 + dp
    s = (dm + p) / (dm * p)
    r = 1.0 / dp + 1.0 / (dm + d0)
    invq0 = 1.0 / ((dm + d0) * d0)
    t = 1.0 / (dp * p) * inv03  # 1 / (d0^3 dp (d0 + dp))
    return (
        (0.0, -d0 ** 4 * q, d0 ** 3 * q, 3.0 * d0 * d0 * q,
         -5.0 * d0 * q, 2.0 * q),
        (1.0, 1.0 / dm - inv0, -inv0 / dm,
         -3.0 * s * inv0sq, 5.0 * s * inv03, -2.0 * s * inv04),
        (0.0, dm * invq0, invq0,
         3.0 * r * inv0sq, -5.0 * r * inv03, 2.0 * r * inv04),
        (0.0, 0.0, 0.0, -3.0 * d0 * d0 * t, 5.0 * d0 * t, -2.0 * t),
    )


_COEFF_ALL = {"d3c1p2s4": _coeffs_all_d3, "d5c2p2s4": _coeffs_all_d5}


def _coeffs_one(fam_name, offset, dm, d0, dp):
    if not -1 <= offset <= 2:
        raise ValueError(f"offset {offset} outside the support window")
    return _COEFF_ALL[fam_name](dm, d0, dp)[offset + 1]


def fundamental_coefficients(fam, offset, d):
    """Monomial coefficients of psi_{s+offset} on [0, d_s] for local vector d.

    d is the (w-1)-tuple of positive interval lengths centered on the segment;
    for w = 4 that is (d_{s-1}, d_s, d_{s+1}).
    """
    if len(d) != fam.support - 1:
        raise ValueError(f"local parameter vector must have {fam.support - 1} "
                         f"entries, got {len(d)}")
    dm, d0, dp = d
    if dm <= 0.0 or d0 <= 0.0 or dp <= 0.0:
        raise DegenerateEdgeError("parameter intervals must be positive")
    return _coeffs_one(fam.name, offset, dm, d0, dp)


def _check_x(x, d0):
    if x < -_X_TOL * d0 or x > d0 * (1.0 + _X_TOL):
        raise ValueError(f"x={x} outside the segment [0, {d0}]")


def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deriv_coeffs(coeffs, r):
    for _ in range(r):
        coeffs = tuple(k * c for k, c in enumerate(coeffs))[1:]
        if not coeffs:
            return (0.0,)
    return coeffs


def eval_fundamental(fam, offset, x, d):
    """Value of the basis function psi_{s+offset} at local coordinate x."""
    _check_x(x, d[1])
    return _horner(fundamental_coefficients(fam, offset, d), x)


def eval_fundamental_deriv(fam, offset, x, d, r):
    """Exact r-th derivative of psi_{s+offset} at x (0 above the degree)."""
    if r < 0:
        raise ValueError("derivative order must be >= 0")
    _check_x(x, d[1])
    if r > fam.degree:
        return 0.0
    coeffs = fundamental_coefficients(fam, offset, d)
    return _horner(_deriv_coeffs(coeffs, r), x)


def fundamental_weights(fam, x, d, r=0):
    """All four basis values (offsets -1..2) at x, optionally differentiated."""
    _check_x(x, d[1])
    all_coeffs = _COEFF_ALL[fam.name](d[0], d[1], d[2])
    if not r:
        return [_horner(c, x) for c in all_coeffs]
    if r > fam.degree:
        return [0.0, 0.0, 0.0, 0.0]
    return [_horner(_deriv_coeffs(c, r), x) for c in all_coeffs]


def make_knots(points, alpha=0.5, closed=False):
    """Knot sequence x_0 = 0, x_{i+1} = x_i + |p_{i+1} - p_i|^alpha.

    alpha = 0.5 is the centripetal choice, 1 chordal, 0 uniform.  For closed
    polylines a wrap-around interval back to the first point is appended, so
    the returned sequence has len(points) + 1 entries.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least two points")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    segs = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    if closed:
        segs.append((pts[-1], pts[0]))
    knots = [0.0]
    for i, (a, b) in enumerate(segs):
        chord = float(np.linalg.norm(b - a))
        if chord == 0.0:
            raise DegenerateEdgeError(f"points {i} and {i + 1} coincide")
        knots.append(knots[-1] + chord ** alpha)
    return np.asarray(knots)


class PolylineCurve:
    """Local spline interpolant of a polyline.

    For an open polyline of N points there are N knots and the curve is only
    evaluable where a full support window exists, i.e. on [x_1, x_{N-2}];
    boundary segments would require special end-condition basis functions that
    this module does not provide.  Closed polylines carry N+1 knots (the last
    is the wrap-around) and evaluate anywhere, indices taken modulo N.
    """

    def __init__(self, points, knots, fam, closed=False):
        self.points = np.asarray(points, dtype=float)
        self.knots = np.asarray(knots, dtype=float)
        self.family = fam
        self.closed = bool(closed)
        n = len(self.points)
        expected = n + 1 if closed else n
        if len(self.knots) != expected:
            raise ValueError(f"expected {expected} knots for "
                             f"{'closed' if closed else 'open'} curve, "
                             f"got {len(self.knots)}")
        ds = np.diff(self.knots)
        if np.any(ds <= 0.0):
            raise DegenerateEdgeError("knots must be strictly increasing")
        self._d = ds
        if closed and n < 3:
            raise ValueError("closed polyline needs at least 3 points")
        if not closed and n < 4:
            raise ValueError("open polyline needs at least 4 points")

    @classmethod
    def from_points(cls, points, fam, alpha=0.5, closed=False):
        return cls(points, make_knots(points, alpha, closed), fam, closed)

    @property
    def dim(self):
        return self.points.shape[1]

    def domain(self):
        """Evaluable parameter range (full period for closed curves)."""
        if self.closed:
            return float(self.knots[0]), float(self.knots[-1])
        return float(self.knots[1]), float(self.knots[-2])

    def _locate(self, x):
        knots = self.knots
        if self.closed:
            period = knots[-1] - knots[0]
            x = (x - knots[0]) % period + knots[0]
            s = int(np.searchsorted(knots, x, side="right")) - 1
            s = min(max(s, 0), len(knots) - 2)
            return s, x - knots[s]
        lo, hi = self.domain()
        span = knots[-1] - knots[0]
        if x < lo - _X_TOL * span or x > hi + _X_TOL * span:
            raise ValueError(f"x={x} outside evaluable range [{lo}, {hi}]")
        s = int(np.searchsorted(knots, x, side="right")) - 1
        s = min(max(s, 1), len(self.points) - 3)
        return s, x - knots[s]

    def _window(self, s):
        n = len(self.points)
        if self.closed:
            idx = [(s + off) % n for off in SUPPORT_OFFSETS]
            d = tuple(self._d[(s + j) % n] for j in (-1, 0, 1))
        else:
            idx = [s + off for off in SUPPORT_OFFSETS]
            d = tuple(self._d[s + j] for j in (-1, 0, 1))
        return idx, d

    def eval(self, x, r=0):
        """Point (r = 0) or r-th derivative vector at parameter x."""
        s, xloc = self._locate(x)
        idx, d = self._window(s)
        w = fundamental_weights(self.family, xloc, d, r)
        out = np.zeros(self.dim)
        for k, i in enumerate(idx):
            out += w[k] * self.points[i]
        return out

    def __call__(self, x):
        return self.eval(x)

    def eval_one_sided(self, knot_index, r, side):
        """Derivative at an interior knot taken from one adjacent segment.

        side = 'left' uses the segment ending at the knot, 'right' the one
        starting there.  Used to verify knot continuity of the family.
        """
        if side == "right":
            s = knot_index
            xloc = 0.0
        elif side == "left":
            s = knot_index - 1
            if not self.closed:
                if s < 1:
                    raise ValueError("no full window left of this knot")
            else:
                s %= len(self.points)
            idx, d = self._window(s)
            xloc = d[1]
            w = fundamental_weights(self.family, xloc, d, r)
            out = np.zeros(self.dim)
            for k, i in enumerate(idx):
                out += w[k] * self.points[i]
            return out
        else:
            raise ValueError("side must be 'left' or 'right'")
        idx, d = self._window(s)
        w = fundamental_weights(self.family, xloc, d, r)
        out = np.zeros(self.dim)
        for k, i in enumerate(idx):
            out += w[k] * self.points[i]
        return out


def eval_curve(curve, x, r=0):
    """Functional form of PolylineCurve.eval."""
    return curve.eval(x, r)


def segment_coefficients(points4, d, fam):
    """Monomial coefficients of one curve segment as an (degree+1, dim) array.

    points4 are the four window points for the segment, d the local interval
    triple; the segment runs over x in [0, d[1]].
    """
    pts = np.asarray(points4, dtype=float)
    coeffs = np.zeros((fam.degree + 1, pts.shape[1]))
    for k, off in enumerate(SUPPORT_OFFSETS):
        c = fundamental_coefficients(fam, off, d)
        coeffs += np.outer(c, pts[k])
    return coeffs


def signed_curvature(curve, x):
    """Signed curvature of a planar (2D) curve at parameter x."""
    if curve.dim != 2:
        raise ValueError("signed curvature requires a 2D curve")
    d1 = curve.eval(x, 1)
    d2 = curve.eval(x, 2)
    speed = float(np.hypot(d1[0], d1[1]))
    if speed == 0.0:
        return 0.0
    return float((d1[0] * d2[1] - d1[1] * d2[0]) / speed ** 3)

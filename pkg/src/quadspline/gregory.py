"""Transfinite patches interpolating four boundary curves and cross fields.

The patch is assembled as S(u,v) = -H(u)^T M(u,v) H(v) with the cubic (G1) or
quintic (G2) Hermite blending vector H carrying a leading -1.  The matrix M
holds boundary/corner data with scalings that map the per-edge local
variables to the uv domain: curve derivatives scale by the constant edge
interval, cross fields by the face's blend function evaluated at the running
parameter, and second-order entries by the squares.  Twist-like corner
entries blend two estimates rationally (linear weights for G1, quadratic for
G2); at the corners, where the weights are 0/0, the mean of the two estimates
is substituted, which is exact when the data are compatible and never affects
interpolation because the blend weights vanish there at second order.

Sides are duck-typed: any object with gamma(x, r=0), chi(x, r=0) and, for G2,
xi(x, r=0) works; derivative orders r >= 1 of chi/xi are only requested at
the side endpoints.
"""

import numpy as np

from .errors import ConstructionError
from .patch import LocalParamFn

CORNER_EPS = 1e-12


def hermite_basis(degree, u):
    """Blending vector: leading -1 then the Hermite basis polynomials."""
    if degree == 3:
        u2 = u * u
        u3 = u2 * u
        return np.array([
            -1.0,
            2.0 * u3 - 3.0 * u2 + 1.0,
            -2.0 * u3 + 3.0 * u2,
            u3 - 2.0 * u2 + u,
            u3 - u2,
        ])
    if degree == 5:
        u2 = u * u
        u3 = u2 * u
        u4 = u3 * u
        u5 = u4 * u
        return np.array([
            -1.0,
            -6.0 * u5 + 15.0 * u4 - 10.0 * u3 + 1.0,
            6.0 * u5 - 15.0 * u4 + 10.0 * u3,
            -3.0 * u5 + 8.0 * u4 - 6.0 * u3 + u,
            -3.0 * u5 + 7.0 * u4 - 4.0 * u3,
            -0.5 * u5 + 1.5 * u4 - 1.5 * u3 + 0.5 * u2,
            0.5 * u5 - u4 + 0.5 * u3,
        ])
    raise ValueError("blending degree must be 3 or 5")


class PolySide:
    """Side backed by polynomial curve/field records (VecPoly)."""

    def __init__(self, gamma, chi=None, xi=None):
        self._gamma = gamma
        self._chi = chi
        self._xi = xi

    def gamma(self, x, r=0):
        return self._gamma.eval(x, r)

    def chi(self, x, r=0):
        return self._chi.eval(x, r)

    def xi(self, x, r=0):
        return self._xi.eval(x, r)


class BoundaryData:
    """Four corners, sides gamma0..gamma3 and the corner intervals.

    The frame matches the uv square: gamma0 runs p0 -> p1 along v=0 over
    [0, d0], gamma1 runs p1 -> p2 along u=1 over [0, e1], gamma2 runs
    p3 -> p2 along v=1 over [0, d1], gamma3 runs p0 -> p3 along u=0 over
    [0, e0].  chi fields are the first cross derivatives in the +x / +y
    local directions; xi the second (G2 only).
    """

    def __init__(self, corners, sides, d0, d1, e0, e1, k, face=None):
        self.corners = np.asarray(corners, dtype=float).reshape(4, 3)
        if len(sides) != 4:
            raise ValueError("need exactly four sides")
        self.sides = list(sides)
        self.d0, self.d1, self.e0, self.e1 = (float(d0), float(d1),
                                              float(e0), float(e1))
        if min(self.d0, self.d1, self.e0, self.e1) <= 0.0:
            raise ValueError("corner intervals must be positive")
        if k not in (1, 2):
            raise ValueError("smoothness order must be 1 or 2")
        self.k = k
        self.face = face
        self._check_corners()

    def _check_corners(self):
        p0, p1, p2, p3 = self.corners
        scale = max(1.0, float(np.abs(self.corners).max()))
        pairs = [
            (self.sides[0].gamma(0.0), p0, "gamma0(0)"),
            (self.sides[0].gamma(self.d0), p1, "gamma0(d0)"),
            (self.sides[1].gamma(0.0), p1, "gamma1(0)"),
            (self.sides[1].gamma(self.e1), p2, "gamma1(e1)"),
            (self.sides[2].gamma(0.0), p3, "gamma2(0)"),
            (self.sides[2].gamma(self.d1), p2, "gamma2(d1)"),
            (self.sides[3].gamma(0.0), p0, "gamma3(0)"),
            (self.sides[3].gamma(self.e0), p3, "gamma3(e0)"),
        ]
        for got, want, label in pairs:
            if np.linalg.norm(got - want) > 1e-7 * scale:
                raise ConstructionError(
                    f"boundary data of face {self.face}: {label} does not "
                    "meet its corner")


def _greg(wa, A, wb, B):
    den = wa + wb
    if den < CORNER_EPS:
        return 0.5 * (A + B)
    return (wa * A + wb * B) / den


class GregoryPatch:
    """Evaluable Coons-Gregory patch over a BoundaryData record."""

    def __init__(self, data, mode=None):
        self.data = data
        if mode is None:
            mode = "g2" if data.k == 2 else "g1"
        if mode == "g2" and data.k < 2:
            raise ValueError("g2 patch needs second-order side data")
        self.mode = mode
        self.blend_degree = 5 if mode == "g2" else 3
        d = data
        self.delta = LocalParamFn(data.k, d.d0, d.d1)
        self.epsilon = LocalParamFn(data.k, d.e0, d.e1)
        g0, g1, g2, g3 = d.sides
        # constant entries: curve endpoint derivatives ...
        self._dg0 = (g0.gamma(0.0, 1), g0.gamma(d.d0, 1))
        self._dg1 = (g1.gamma(0.0, 1), g1.gamma(d.e1, 1))
        self._dg2 = (g2.gamma(0.0, 1), g2.gamma(d.d1, 1))
        self._dg3 = (g3.gamma(0.0, 1), g3.gamma(d.e0, 1))
        # ... and cross-field endpoint derivatives feeding the twist blends
        self._dchi0 = (g0.chi(0.0, 1), g0.chi(d.d0, 1))
        self._dchi1 = (g1.chi(0.0, 1), g1.chi(d.e1, 1))
        self._dchi2 = (g2.chi(0.0, 1), g2.chi(d.d1, 1))
        self._dchi3 = (g3.chi(0.0, 1), g3.chi(d.e0, 1))
        if mode == "g2":
            self._ddg0 = (g0.gamma(0.0, 2), g0.gamma(d.d0, 2))
            self._ddg1 = (g1.gamma(0.0, 2), g1.gamma(d.e1, 2))
            self._ddg2 = (g2.gamma(0.0, 2), g2.gamma(d.d1, 2))
            self._ddg3 = (g3.gamma(0.0, 2), g3.gamma(d.e0, 2))
            self._ddchi0 = (g0.chi(0.0, 2), g0.chi(d.d0, 2))
            self._ddchi1 = (g1.chi(0.0, 2), g1.chi(d.e1, 2))
            self._ddchi2 = (g2.chi(0.0, 2), g2.chi(d.d1, 2))
            self._ddchi3 = (g3.chi(0.0, 2), g3.chi(d.e0, 2))
            self._dxi0 = (g0.xi(0.0, 1), g0.xi(d.d0, 1))
            self._dxi1 = (g1.xi(0.0, 1), g1.xi(d.e1, 1))
            self._dxi2 = (g2.xi(0.0, 1), g2.xi(d.d1, 1))
            self._dxi3 = (g3.xi(0.0, 1), g3.xi(d.e0, 1))
            self._ddxi0 = (g0.xi(0.0, 2), g0.xi(d.d0, 2))
            self._ddxi1 = (g1.xi(0.0, 2), g1.xi(d.e1, 2))
            self._ddxi2 = (g2.xi(0.0, 2), g2.xi(d.d1, 2))
            self._ddxi3 = (g3.xi(0.0, 2), g3.xi(d.e0, 2))

    # -- matrix assembly ------------------------------------------------------
    def _omega11(self, u, v, quadratic):
        d = self.data
        if quadratic:
            wu0, wu1 = u * u, (1.0 - u) ** 2
            wv0, wv1 = v * v, (1.0 - v) ** 2
        else:
            wu0, wu1 = u, 1.0 - u
            wv0, wv1 = v, 1.0 - v
        c3, c0 = self._dchi3, self._dchi0
        c1, c2 = self._dchi1, self._dchi2
        return (
            d.d0 * d.e0 * _greg(wu0, c3[0], wv0, c0[0]),
            d.d1 * d.e0 * _greg(wu0, c3[1], wv1, c2[0]),
            d.d0 * d.e1 * _greg(wu1, c1[0], wv0, c0[1]),
            d.d1 * d.e1 * _greg(wu1, c1[1], wv1, c2[1]),
        )

    def _matrix(self, u, v):
        d = self.data
        g0, g1, g2, g3 = d.sides
        x0 = u * d.d0
        x1 = u * d.d1
        y0 = v * d.e0
        y1 = v * d.e1
        eps = self.epsilon(u)
        dlt = self.delta(v)
        n = 7 if self.mode == "g2" else 5
        M = np.zeros((n, n, 3))
        p0, p1, p2, p3 = d.corners

        M[0, 1] = g0.gamma(x0)
        M[0, 2] = g2.gamma(x1)
        M[0, 3] = eps * g0.chi(x0)
        M[0, 4] = eps * g2.chi(x1)
        M[1, 0] = g3.gamma(y0)
        M[1, 1] = p0
        M[1, 2] = p3
        M[1, 3] = d.e0 * self._dg3[0]
        M[1, 4] = d.e0 * self._dg3[1]
        M[2, 0] = g1.gamma(y1)
        M[2, 1] = p1
        M[2, 2] = p2
        M[2, 3] = d.e1 * self._dg1[0]
        M[2, 4] = d.e1 * self._dg1[1]
        M[3, 0] = dlt * g3.chi(y0)
        M[3, 1] = d.d0 * self._dg0[0]
        M[3, 2] = d.d1 * self._dg2[0]
        M[4, 0] = dlt * g1.chi(y1)
        M[4, 1] = d.d0 * self._dg0[1]
        M[4, 2] = d.d1 * self._dg2[1]
        o = self._omega11(u, v, quadratic=(self.mode == "g2"))
        M[3, 3], M[3, 4], M[4, 3], M[4, 4] = o

        if self.mode == "g1":
            return M

        eps2 = eps * eps
        dlt2 = dlt * dlt
        M[0, 5] = eps2 * g0.xi(x0)
        M[0, 6] = eps2 * g2.xi(x1)
        M[1, 5] = d.e0 ** 2 * self._ddg3[0]
        M[1, 6] = d.e0 ** 2 * self._ddg3[1]
        M[2, 5] = d.e1 ** 2 * self._ddg1[0]
        M[2, 6] = d.e1 ** 2 * self._ddg1[1]
        M[5, 0] = dlt2 * g3.xi(y0)
        M[5, 1] = d.d0 ** 2 * self._ddg0[0]
        M[5, 2] = d.d1 ** 2 * self._ddg2[0]
        M[6, 0] = dlt2 * g1.xi(y1)
        M[6, 1] = d.d0 ** 2 * self._ddg0[1]
        M[6, 2] = d.d1 ** 2 * self._ddg2[1]

        # mixed third/fourth order corner estimates
        M[3, 5], M[3, 6], M[4, 5], M[4, 6] = self._omega12(u, v)
        o21 = self._omega21(u, v)
        M[5, 3], M[5, 4], M[6, 3], M[6, 4] = o21
        o22 = self._omega22(u, v)
        M[5, 5], M[5, 6], M[6, 5], M[6, 6] = o22
        return M

    def _omega12(self, u, v):
        d = self.data
        wu0, wu1 = u * u, (1.0 - u) ** 2
        wv0, wv1 = v * v, (1.0 - v) ** 2
        return (
            d.d0 * d.e0 ** 2 * _greg(wu0, self._ddchi3[0], wv0, self._dxi0[0]),
            d.d1 * d.e0 ** 2 * _greg(wu0, self._ddchi3[1], wv1, self._dxi2[0]),
            d.d0 * d.e1 ** 2 * _greg(wu1, self._ddchi1[0], wv0, self._dxi0[1]),
            d.d1 * d.e1 ** 2 * _greg(wu1, self._ddchi1[1], wv1, self._dxi2[1]),
        )

    def _omega21(self, u, v):
        d = self.data
        wu0, wu1 = u * u, (1.0 - u) ** 2
        wv0, wv1 = v * v, (1.0 - v) ** 2
        return (
            d.d0 ** 2 * d.e0 * _greg(wu0, self._dxi3[0], wv0, self._ddchi0[0]),
            d.d1 ** 2 * d.e0 * _greg(wu0, self._dxi3[1], wv1, self._ddchi2[0]),
            d.d0 ** 2 * d.e1 * _greg(wu1, self._dxi1[0], wv0, self._ddchi0[1]),
            d.d1 ** 2 * d.e1 * _greg(wu1, self._dxi1[1], wv1, self._ddchi2[1]),
        )

    def _omega22(self, u, v):
        d = self.data
        wu0, wu1 = u * u, (1.0 - u) ** 2
        wv0, wv1 = v * v, (1.0 - v) ** 2
        return (
            d.d0 ** 2 * d.e0 ** 2 * _greg(wu0, self._ddxi3[0], wv0, self._ddxi0[0]),
            d.d1 ** 2 * d.e0 ** 2 * _greg(wu0, self._ddxi3[1], wv1, self._ddxi2[0]),
            d.d0 ** 2 * d.e1 ** 2 * _greg(wu1, self._ddxi1[0], wv0, self._ddxi0[1]),
            d.d1 ** 2 * d.e1 ** 2 * _greg(wu1, self._ddxi1[1], wv1, self._ddxi2[1]),
        )

    def eval(self, u, v):
        M = self._matrix(u, v)
        hu = hermite_basis(self.blend_degree, u)
        hv = hermite_basis(self.blend_degree, v)
        return -np.einsum("i,ijk,j->k", hu, M, hv)

    def __call__(self, u, v):
        return self.eval(u, v)


def eval_g1(patch, u, v):
    if patch.mode != "g1":
        raise ValueError("patch is not bicubically blended")
    return patch.eval(u, v)


def eval_g2(patch, u, v):
    if patch.mode != "g2":
        raise ValueError("patch is not biquintically blended")
    return patch.eval(u, v)

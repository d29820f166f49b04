"""Surface patch over one regular face with per-edge parameter intervals.

The patch on [0,1]^2 blends, for each grid row, the bottom and top interval of
that row with a degree-(2k+1) polynomial whose derivatives through order k
vanish at the ends (and likewise per column).  The blended intervals feed the
univariate basis functions in the two local variables

    x = u * row_blend_center(v),    y = v * col_blend_center(u),

and the patch is S(u, v) = sum_ij p_ij psi_i(x; d(v)) psi_j(y; e(u)).

Because the blend derivatives vanish at the ends, cross-boundary derivatives
through order k collapse to the x/y partials times a power of the boundary
blend value, which keeps boundary data exact and cheap.
"""

import numpy as np

from .splines import fundamental_weights, segment_coefficients

SIDES = ("v0", "v1", "u0", "u1")


class LocalParamFn:
    """Monotone polynomial on [0,1] from a to b with flat ends of order k."""

    def __init__(self, k, a, b):
        if a <= 0.0 or b <= 0.0:
            raise ValueError("interval endpoints must be positive")
        if k not in (1, 2):
            raise ValueError("only smoothness orders 1 and 2 are supported")
        self.k = k
        self.a = float(a)
        self.b = float(b)

    def __call__(self, t):
        if self.k == 1:
            blend = t * t * (3.0 - 2.0 * t)
        else:
            blend = t ** 3 * (10.0 + t * (-15.0 + 6.0 * t))
        return self.a + (self.b - self.a) * blend

    def deriv(self, t, r=1):
        c = self.b - self.a
        if self.k == 1:
            polys = {1: 6.0 * t * (1.0 - t), 2: 6.0 - 12.0 * t, 3: -12.0}
            val = polys.get(r, 0.0)
        else:
            polys = {1: 30.0 * t * t * (1.0 - t) ** 2,
                     2: t * (60.0 + t * (-180.0 + 120.0 * t)),
                     3: 60.0 + t * (-360.0 + 360.0 * t),
                     4: -360.0 + 720.0 * t,
                     5: 720.0}
            val = polys.get(r, 0.0)
        return c * val if r >= 1 else self(t)


def smooth_blend(k, a, b):
    return LocalParamFn(k, a, b)


class RegularPatch:
    """Evaluable patch over a LocalGrid (support width 4 families)."""

    def __init__(self, grid, fam):
        if grid.w != fam.support:
            raise ValueError("grid width does not match the family support")
        if fam.support != 4:
            raise ValueError("only support-4 families are evaluable")
        if grid.d0 is None:
            raise ValueError("grid carries no parameter intervals")
        self.grid = grid
        self.family = fam
        self.k = fam.continuity
        k = min(self.k, 2)
        self.row_blends = [LocalParamFn(k, a, b)
                           for a, b in zip(grid.d0, grid.d1)]
        self.col_blends = [LocalParamFn(k, a, b)
                           for a, b in zip(grid.e0, grid.e1)]
        self._c = grid.w // 2 - 1  # index of the face's own row/column cell
        self._p16 = grid.points.reshape(16, 3)

    # -- evaluation ----------------------------------------------------------
    def _vectors(self, u, v):
        dvec = tuple(b(v) for b in self.row_blends)
        evec = tuple(b(u) for b in self.col_blends)
        return dvec, evec

    def eval(self, u, v):
        dvec, evec = self._vectors(u, v)
        x = u * dvec[self._c]
        y = v * evec[self._c]
        wx = fundamental_weights(self.family, x, dvec)
        wy = fundamental_weights(self.family, y, evec)
        w = np.outer(wx, wy).reshape(16)
        return w @ self._p16

    def __call__(self, u, v):
        return self.eval(u, v)

    # -- boundary data ---------------------------------------------------------
    def side_interval(self, side):
        """Length of the local variable range along a side."""
        c = self._c
        return {"v0": self.grid.d0[c], "v1": self.grid.d1[c],
                "u0": self.grid.e0[c], "u1": self.grid.e1[c]}[side]

    def side_blend(self, side):
        """Blend function whose powers scale cross derivatives on that side."""
        if side in ("u0", "u1"):
            return self.row_blends[self._c]
        return self.col_blends[self._c]

    def section_data(self, side):
        """(window points, interval triple) of the side's section curve."""
        g = self.grid
        if side == "v0":
            return g.points[:, 1, :], tuple(g.d0)
        if side == "v1":
            return g.points[:, 2, :], tuple(g.d1)
        if side == "u0":
            return g.points[1, :, :], tuple(g.e0)
        if side == "u1":
            return g.points[2, :, :], tuple(g.e1)
        raise ValueError(f"unknown side {side!r}")

    def eval_boundary(self, side, x, r=0):
        """Boundary curve (or its x-derivatives) in the side's local variable."""
        pts, d = self.section_data(side)
        w = fundamental_weights(self.family, x, d, r)
        return np.asarray(w) @ pts

    def boundary_segment_coefficients(self, side):
        pts, d = self.section_data(side)
        return segment_coefficients(pts, d, self.family)

    def cross_field(self, side, x, r=1):
        """r-th cross derivative in local variables along a side.

        For side v0/v1 this is the r-th y-partial as a function of the
        boundary variable x; for u0/u1 the roles of the axes swap.
        """
        g = self.grid
        c = self._c
        if side in ("v0", "v1"):
            d = tuple(g.d0 if side == "v0" else g.d1)
            u = x / d[c]
            evec = tuple(b(u) for b in self.col_blends)
            y = 0.0 if side == "v0" else evec[c]
            wx = fundamental_weights(self.family, x, d)
            wy = fundamental_weights(self.family, y, evec, r)
            w = np.outer(wx, wy).reshape(16)
            return w @ self._p16
        d = tuple(g.e0 if side == "u0" else g.e1)
        v = x / d[c]
        dvec = tuple(b(v) for b in self.row_blends)
        xx = 0.0 if side == "u0" else dvec[c]
        wx = fundamental_weights(self.family, xx, dvec, r)
        wy = fundamental_weights(self.family, x, d)
        w = np.outer(wx, wy).reshape(16)
        return w @ self._p16

    def corner_mixed(self, ui, vi, q, r):
        """Exact mixed local derivative d^q/dx^q d^r/dy^r at a patch corner.

        ui, vi pick the corner (0 or 1 per axis).  Valid for q, r <= k where
        the blend derivatives vanish.
        """
        g = self.grid
        c = self._c
        d = tuple(g.d0 if vi == 0 else g.d1)
        e = tuple(g.e0 if ui == 0 else g.e1)
        x = 0.0 if ui == 0 else d[c]
        y = 0.0 if vi == 0 else e[c]
        wx = fundamental_weights(self.family, x, d, q)
        wy = fundamental_weights(self.family, y, e, r)
        w = np.outer(wx, wy).reshape(16)
        return w @ self._p16

    def corner_normal(self, ui, vi):
        su = self.corner_mixed(ui, vi, 1, 0)
        sv = self.corner_mixed(ui, vi, 0, 1)
        n = np.cross(su, sv)
        norm = np.linalg.norm(n)
        if norm == 0.0:
            raise ValueError("degenerate corner frame")
        return n / norm

    def corner_curvature(self, ui, vi):
        """Principal curvatures and directions from the fundamental forms."""
        su = self.corner_mixed(ui, vi, 1, 0)
        sv = self.corner_mixed(ui, vi, 0, 1)
        suu = self.corner_mixed(ui, vi, 2, 0)
        suv = self.corner_mixed(ui, vi, 1, 1)
        svv = self.corner_mixed(ui, vi, 0, 2)
        return principal_curvatures(su, sv, suu, suv, svv)

    def boundary_deriv(self, side, t, r_cross, r_along=0):
        """uv-domain derivative at a boundary point.

        Supported combinations: pure along-boundary (r_cross = 0), pure cross
        (r_along = 0, r_cross <= k), and mixed at the side's endpoints
        (t in {0, 1}, orders <= k).  Elsewhere the chain rule involves blend
        derivatives and no closed form is exposed.
        """
        if r_cross > self.k:
            raise ValueError(f"cross order {r_cross} exceeds continuity "
                             f"{self.k}")
        d_edge = self.side_interval(side)
        x = t * d_edge
        if r_cross == 0:
            return d_edge ** r_along * self.eval_boundary(side, x, r_along)
        if r_along == 0:
            scale = self.side_blend(side)(t) ** r_cross
            return scale * self.cross_field(side, x, r_cross)
        if t not in (0.0, 1.0):
            raise ValueError("mixed boundary derivatives are exact only at "
                             "corners")
        ti = int(t)
        if side == "v0":
            ui, vi, q, r = ti, 0, r_along, r_cross
        elif side == "v1":
            ui, vi, q, r = ti, 1, r_along, r_cross
        elif side == "u0":
            ui, vi, q, r = 0, ti, r_cross, r_along
        else:
            ui, vi, q, r = 1, ti, r_cross, r_along
        dv = self.row_blends[self._c](float(vi))
        ev = self.col_blends[self._c](float(ui))
        return dv ** q * ev ** r * self.corner_mixed(ui, vi, q, r)


def eval_patch(patch, u, v):
    return patch.eval(u, v)


def eval_patch_boundary_deriv(patch, side, t, r_cross, r_along=0):
    return patch.boundary_deriv(side, t, r_cross, r_along)


def boundary_scaling_delta(patch, neighbor, v):
    """Cross-derivative scaling between a patch and its left neighbor.

    The configuration is the aligned one: the patch's u0 side coincides with
    the neighbor's u1 side, traversed by the same v.  The ratio returned
    relates r-th cross derivatives as (patch side) = delta^r (neighbor side).
    """
    if not np.allclose(patch.grid.points[1], neighbor.grid.points[2],
                       atol=1e-12):
        raise ValueError("patches do not share an aligned u0/u1 boundary")
    c = patch._c
    num = patch.row_blends[c](v)
    den = patch.row_blends[c - 1](v)
    return num / den


def sample_boundary_data(patch, side):
    """Boundary curve and cross fields of one side, in its local variable.

    Returns a dict of callables: gamma(x, r), chi(x) and (for C2 families)
    xi(x), each expressed in local variables so a consumer on the other side
    of the boundary can rescale them with its own blend functions.  chi/xi
    derivatives are exposed at the side endpoints only, where they are exact.
    """
    k = patch.k

    def chi(x, r=0):
        if r == 0:
            return patch.cross_field(side, x, 1)
        return _endpoint_cross_deriv(patch, side, x, 1, r)

    def xi(x, r=0):
        if k < 2:
            raise ValueError("second-order cross field needs a C2 family")
        if r == 0:
            return patch.cross_field(side, x, 2)
        return _endpoint_cross_deriv(patch, side, x, 2, r)

    data = {
        "interval": patch.side_interval(side),
        "gamma": lambda x, r=0: patch.eval_boundary(side, x, r),
        "chi": chi,
    }
    if k >= 2:
        data["xi"] = xi
    return data


def _endpoint_cross_deriv(patch, side, x, cross_order, along_order):
    d_edge = patch.side_interval(side)
    if abs(x) <= 1e-9 * d_edge:
        ti = 0
    elif abs(x - d_edge) <= 1e-9 * d_edge:
        ti = 1
    else:
        raise ValueError("cross-field derivatives are exact at endpoints only")
    if side == "v0":
        ui, vi, q, r = ti, 0, along_order, cross_order
    elif side == "v1":
        ui, vi, q, r = ti, 1, along_order, cross_order
    elif side == "u0":
        ui, vi, q, r = 0, ti, cross_order, along_order
    else:
        ui, vi, q, r = 1, ti, cross_order, along_order
    return patch.corner_mixed(ui, vi, q, r)


def principal_curvatures(su, sv, suu, suv, svv):
    """(k1, k2, dir1, dir2, normal) from first/second derivative vectors."""
    n = np.cross(su, sv)
    norm = np.linalg.norm(n)
    if norm < 1e-14:
        raise ValueError("degenerate tangent frame")
    n = n / norm
    E, F, G = su @ su, su @ sv, sv @ sv
    L, M, N = suu @ n, suv @ n, svv @ n
    first = np.array([[E, F], [F, G]])
    second = np.array([[L, M], [M, N]])
    shape = np.linalg.solve(first, second)
    evals, evecs = np.linalg.eig(shape)
    evals = evals.real
    evecs = evecs.real
    order = np.argsort(evals)[::-1]
    k1, k2 = float(evals[order[0]]), float(evals[order[1]])
    d1 = evecs[:, order[0]]
    d2 = evecs[:, order[1]]
    dir1 = d1[0] * su + d1[1] * sv
    dir2 = d2[0] * su + d2[1] * sv
    dir1 = dir1 / np.linalg.norm(dir1)
    # orthonormalize within the tangent plane
    dir2 = dir2 - (dir2 @ dir1) * dir1
    nrm2 = np.linalg.norm(dir2)
    if nrm2 < 1e-12:
        dir2 = np.cross(n, dir1)
    else:
        dir2 = dir2 / nrm2
    return k1, k2, dir1, dir2, n

import numpy as np
import pytest

from quadspline.errors import DegenerateEdgeError
from quadspline.splines import (D3C1P2S4, D5C2P2S4, PolylineCurve,
                                eval_curve, eval_fundamental,
                                eval_fundamental_deriv, family,
                                fundamental_weights, make_knots,
                                segment_coefficients)

BOTH = [D3C1P2S4, D5C2P2S4]


# independent transcription of the closed-form segment polynomials, used to
# cross-check the expanded-coefficient evaluation path
def factored_basis(fam, off, x, d):
    dm, d0, dp = d
    if fam.name == "d3c1p2s4":
        if off == -1:
            return -x * (x - d0) ** 2 / (dm * d0 * (dm + d0))
        if off == 0:
            return (x - d0) / d0 ** 2 * (x * x / (d0 + dp)
                                         + x * (x - d0) / dm - d0)
        if off == 1:
            return x / d0 ** 2 * ((d0 * (dm + 2 * x) - x * x) / (dm + d0)
                                  - x * (x - d0) / dp)
        return x * x * (x - d0) / (d0 * dp * (d0 + dp))
    if off == -1:
        return x * (x - d0) ** 3 * (d0 + 2 * x) / (dm * d0 ** 3 * (dm + d0))
    if off == 0:
        num = dm * (-3 * x ** 3 * d0 + d0 ** 4 + d0 ** 3 * dp + 2 * x ** 4) \
            + x * (d0 + dp) * (d0 + 2 * x) * (x - d0) ** 2
        return (d0 - x) * num / (dm * d0 ** 4 * (d0 + dp))
    if off == 1:
        return x / d0 ** 4 * (x * x * (2 * x - 3 * d0) * (x - d0) / dp
                              + (-5 * x ** 3 * d0 + 3 * x * x * d0 * d0
                                 + d0 ** 3 * (dm + x) + 2 * x ** 4)
                              / (dm + d0))
    return -x ** 3 * (2 * x - 3 * d0) * (x - d0) \
        / (d0 ** 3 * dp * (d0 + dp))


@pytest.mark.parametrize("fam", BOTH)
def test_coefficients_match_factored_forms(fam):
    rng = np.random.default_rng(1)
    for _ in range(50):
        d = tuple(rng.uniform(0.2, 3.0, 3))
        x = rng.uniform(0.0, d[1])
        for off in (-1, 0, 1, 2):
            got = eval_fundamental(fam, off, x, d)
            want = factored_basis(fam, off, x, d)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("fam", BOTH)
def test_uniform_midpoint_weights(fam):
    d = (1.0, 1.0, 1.0)
    expected = (-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0)
    for off, want in zip((-1, 0, 1, 2), expected):
        assert abs(eval_fundamental(fam, off, 0.5, d) - want) < 1e-14


@pytest.mark.parametrize("fam", BOTH)
def test_delta_property(fam):
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = tuple(rng.uniform(0.1, 4.0, 3))
        # at x = 0 the center function is 1, at x = d0 the next one
        vals0 = fundamental_weights(fam, 0.0, d)
        vals1 = fundamental_weights(fam, d[1], d)
        assert np.allclose(vals0, [0.0, 1.0, 0.0, 0.0], atol=1e-12)
        assert np.allclose(vals1, [0.0, 0.0, 1.0, 0.0], atol=1e-12)


@pytest.mark.parametrize("fam", BOTH)
def test_partition_of_unity(fam):
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = tuple(rng.uniform(0.05, 5.0, 3))
        x = rng.uniform(0.0, d[1])
        assert abs(sum(fundamental_weights(fam, x, d)) - 1.0) < 1e-10


@pytest.mark.parametrize("fam", BOTH)
def test_derivative_matches_finite_differences(fam):
    rng = np.random.default_rng(4)
    h = 1e-5
    for _ in range(10):
        d = tuple(rng.uniform(0.5, 2.0, 3))
        x = rng.uniform(2 * h, d[1] - 2 * h)
        for off in (-1, 0, 1, 2):
            for r in range(1, fam.continuity + 2):
                exact = eval_fundamental_deriv(fam, off, x, d, r)
                if r == 1:
                    fd = (eval_fundamental(fam, off, x + h, d)
                          - eval_fundamental(fam, off, x - h, d)) / (2 * h)
                else:
                    fd = (eval_fundamental_deriv(fam, off, x + h, d, r - 1)
                          - eval_fundamental_deriv(fam, off, x - h, d, r - 1)
                          ) / (2 * h)
                assert fd == pytest.approx(exact, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("fam", BOTH)
def test_deriv_order_zero_and_cap(fam):
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = tuple(rng.uniform(0.2, 2.0, 3))
        x = rng.uniform(0.0, d[1])
        for off in (-1, 0, 1, 2):
            assert eval_fundamental_deriv(fam, off, x, d, 0) == \
                pytest.approx(eval_fundamental(fam, off, x, d), abs=1e-15)
            assert eval_fundamental_deriv(fam, off, x, d,
                                          fam.degree + 1) == 0.0
    # derivative of the partition of unity vanishes
    d = (0.7, 1.3, 0.4)
    for x in np.linspace(0.0, d[1], 7):
        total = sum(eval_fundamental_deriv(fam, off, x, d, 1)
                    for off in (-1, 0, 1, 2))
        assert abs(total) < 1e-10


def test_offset_out_of_support():
    with pytest.raises(ValueError):
        eval_fundamental(D3C1P2S4, 3, 0.1, (1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        eval_fundamental(D5C2P2S4, -2, 0.1, (1.0, 1.0, 1.0))


def test_family_lookup():
    assert family("D5C2P2S4") is D5C2P2S4
    with pytest.raises(ValueError):
        family("d4c2p1s4")


def test_make_knots_examples():
    k = make_knots([(0, 0), (1, 0), (1, 1)], alpha=0.5)
    assert np.allclose(k, [0.0, 1.0, 2.0])
    k = make_knots([(0, 0), (4, 0)], alpha=0.5)
    assert np.allclose(k, [0.0, 2.0])
    k = make_knots([(0, 0), (4, 0), (5, 0)], alpha=1.0)
    assert np.allclose(k, [0.0, 4.0, 5.0])
    k = make_knots([(0, 0), (1, 0), (1, 1), (0, 1)], alpha=0.5, closed=True)
    assert len(k) == 5 and np.allclose(np.diff(k), 1.0)


def test_make_knots_rejects_coincident_points():
    with pytest.raises(DegenerateEdgeError):
        make_knots([(0, 0), (0, 0), (1, 1)])


@pytest.mark.parametrize("fam", BOTH)
def test_curve_interpolates_at_knots(fam):
    rng = np.random.default_rng(6)
    pts = rng.normal(size=(9, 3))
    curve = PolylineCurve.from_points(pts, fam, closed=True)
    for j in range(9):
        assert np.allclose(curve.eval(curve.knots[j]), pts[j], atol=1e-12)
    open_curve = PolylineCurve.from_points(pts, fam, closed=False)
    for j in range(1, 8):
        assert np.allclose(open_curve.eval(open_curve.knots[j]), pts[j],
                           atol=1e-12)


@pytest.mark.parametrize("fam", BOTH)
def test_quadratic_reproduction(fam):
    ts = np.array([0.0, 0.7, 1.6, 2.2, 3.1])
    pts = np.stack([ts, ts * ts], axis=1)
    curve = PolylineCurve(pts, ts, fam, closed=False)
    rng = np.random.default_rng(7)
    lo, hi = curve.domain()
    for x in rng.uniform(lo, hi, 20):
        p = curve.eval(x)
        assert np.allclose(p, [x, x * x], atol=1e-9)


@pytest.mark.parametrize("fam", BOTH)
def test_compact_support(fam):
    # values on a segment ignore points outside the four-point window
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(10, 3))
    curve = PolylineCurve.from_points(pts, fam, closed=False)
    x = 0.5 * (curve.knots[4] + curve.knots[5])  # segment 4: window 3..6
    base = curve.eval(x)
    pts2 = pts.copy()
    pts2[0] += 5.0
    pts2[1] -= 3.0
    pts2[8] += 2.0
    pts2[9] -= 7.0
    moved = PolylineCurve(pts2, curve.knots, fam, closed=False)
    assert np.allclose(moved.eval(x), base, atol=1e-14)


@pytest.mark.parametrize("fam", BOTH)
def test_knot_continuity_one_sided(fam):
    rng = np.random.default_rng(9)
    pts = rng.normal(size=(10, 3))
    knots = np.concatenate([[0.0], np.cumsum(rng.uniform(0.3, 2.0, 10))])
    curve = PolylineCurve(pts, knots, fam, closed=True)
    for j in range(1, 9):
        for r in range(fam.continuity + 1):
            left = curve.eval_one_sided(j, r, "left")
            right = curve.eval_one_sided(j, r, "right")
            scale = max(np.linalg.norm(left), np.linalg.norm(right), 1.0)
            assert np.linalg.norm(left - right) / scale < 1e-9


@pytest.mark.parametrize("fam", BOTH)
def test_closed_square_symmetry(fam):
    pts = np.array([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])
    curve = PolylineCurve.from_points(pts, fam, closed=True)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    period = curve.knots[-1] - curve.knots[0]
    for x in np.linspace(0.0, period, 17, endpoint=False):
        a = curve.eval(x)
        b = curve.eval(x + period / 4.0)
        assert np.allclose(rot @ a, b, atol=1e-12)


@pytest.mark.parametrize("fam", BOTH)
def test_open_curve_domain_error(fam):
    pts = np.random.default_rng(10).normal(size=(6, 2))
    curve = PolylineCurve.from_points(pts, fam, closed=False)
    lo, hi = curve.domain()
    with pytest.raises(ValueError):
        curve.eval(lo - 0.5)
    with pytest.raises(ValueError):
        curve.eval(hi + 0.5)


@pytest.mark.parametrize("fam", BOTH)
def test_segment_coefficients_match_eval(fam):
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(4, 3))
    d = tuple(rng.uniform(0.4, 1.7, 3))
    coeffs = segment_coefficients(pts, d, fam)
    for x in np.linspace(0.0, d[1], 9):
        w = fundamental_weights(fam, x, d)
        direct = np.asarray(w) @ pts
        horner = np.zeros(3)
        for row in coeffs[::-1]:
            horner = horner * x + row
        assert np.allclose(direct, horner, atol=1e-12)


def test_eval_curve_wrapper():
    pts = np.random.default_rng(12).normal(size=(6, 3))
    curve = PolylineCurve.from_points(pts, D3C1P2S4, closed=True)
    x = 0.4 * curve.knots[-1]
    assert np.allclose(eval_curve(curve, x), curve.eval(x))

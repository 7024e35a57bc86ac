import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellman_strip import parse_family
from bellman_strip.foliation.patches import (AffinePatch, angle_coeffs, balance_residual, corner_coeffs,
                                             corner_gluing_slopes, multifigure_coeffs, square_coeffs,
                                             to_bilinear, trolleybus_coeffs)
from bellman_strip.foliation import solve_m

coef = st.floats(-5, 5)


@given(b0=coef, b1=coef, b2=coef, x1=st.floats(-3, 3), x2=st.floats(-1, 1))
@settings(max_examples=100, deadline=None)
def test_bilinear_equals_affine_under_the_change_of_variables(b0, b1, b2, x1, x2):
    ap = AffinePatch(b0, b1, b2)
    bp = to_bilinear(ap, "square")
    lhs = bp.value_x(x1, x2)
    rhs = ap.value_y(x1, x1 * x1 + 1 - x2 * x2)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


@given(b0=coef, b1=coef, b2=coef, x1=st.floats(-3, 3), x2=st.floats(-0.99, 0.99))
@settings(max_examples=50, deadline=None)
def test_bilinear_patch_is_affine_along_diagonals(b0, b1, b2, x1, x2):
    bp = to_bilinear(AffinePatch(b0, b1, b2), "square")
    h = 1e-2
    for e in ((1, 1), (1, -1)):
        d2 = bp.value_x(x1 + h * e[0], x2 + h * e[1]) - 2 * bp.value_x(x1, x2) + bp.value_x(x1 - h * e[0], x2 - h * e[1])
        assert abs(d2) < 1e-10 * max(1.0, abs(b0) + abs(b1) + abs(b2))


def test_angle_touches_boundary_tangentially():
    bd = parse_family("pmom:3")
    mR = solve_m(bd, "R", (-np.inf, 0.0))
    mL = solve_m(bd, "L", (0.0, np.inf))
    assert abs(balance_residual(bd, mR, mL, 0.0)) < 1e-12
    ap = angle_coeffs(bd, 0.0, mR, mL)
    # value and slope of f at the vertex
    assert abs(ap.value_y(0.0, 0.0) - bd.f(0.0)) < 1e-14
    assert abs(ap.beta1 + 2 * ap.beta2 * 0.0 - bd.f1(0.0)) < 1e-14
    sq = square_coeffs(bd, 0.0, mR, mL)
    # the square value at the origin is Gamma(4)/2 = 3
    assert abs(sq.value_x(0.0, 0.0) - 3.0) < 1e-9


def test_trolleybus_interpolates_f_at_chord_ends():
    bd = parse_family("poly5:1.1")
    a0, b0 = -1.5727646, -0.4655812
    ap = trolleybus_coeffs(bd, a0, b0)
    for t in (a0, b0):
        assert abs(ap.value_y(t, t * t) - bd.f(t)) < 1e-12
    bp = corner_coeffs(bd, a0, b0)
    assert bp.alpha11 == ap.beta2 and bp.alpha0 == ap.beta0 + ap.beta2


def test_corner_gluing_slopes_mirror():
    bd = parse_family("poly5:1.1")
    ma_l, mb_l = corner_gluing_slopes(bd, -1.5, -0.5, "L")
    ma_r, mb_r = corner_gluing_slopes(bd, -1.5, -0.5, "R")
    assert abs((ma_l + ma_r) / 2 - bd.f1(-1.5)) < 1e-14
    assert abs((mb_l + mb_r) / 2 - bd.f1(-0.5)) < 1e-14


@pytest.mark.parametrize("pts", [(-1.0, 0.5, 2.0), (-2.0, 1.0)])
def test_multifigure_exact_on_quadratics(pts):
    bd = parse_family("quad")
    ap = multifigure_coeffs(bd, pts, (-1.0, 1.0))
    assert abs(ap.beta2 - 1.0) < 1e-14
    for t in pts:
        assert abs(ap.value_y(t, t * t) - t * t) < 1e-12

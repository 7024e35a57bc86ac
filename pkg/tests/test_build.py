import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellman_strip import CoverageError, DomainError, NoRootError, UnsupportedFoliationError, parse_family, table
from bellman_strip.foliation import (balance_roots, build_all_left, build_all_right, build_angle_square,
                                     build_corner, build_symmetric_chord, solve_balance, solve_m)

from conftest import exp_B, exp_V, spec_for


@pytest.mark.parametrize("fam,regime", [
    ("exp:0.5", "AllLeft"), ("negexp:0.5", "AllRight"), ("quad", "AllRight"), ("pmom:3", "AngleSquare"),
    ("pmom:1.5", "SymmetricChord"), ("poly5:0.5", "AllLeft"), ("poly5:1.1", "CornerRegime"),
    ("poly5:2", "CupAngle"),
])
def test_automatic_regime(fam, regime):
    assert spec_for(fam).regime == regime


@given(x1=st.floats(-4, 4), x2=st.floats(-1, 1))
@settings(max_examples=100, deadline=None)
def test_exp_against_closed_form(x1, x2):
    spec = spec_for("exp:0.5")
    v = exp_V(0.5, x1, x2)
    assert abs(spec.eval_V(x1, x2) - v) <= 1e-10 * max(1.0, abs(v))


@given(y1=st.floats(-3, 3), d=st.floats(0, 1))
@settings(max_examples=60, deadline=None)
def test_exp_B_against_closed_form(y1, d):
    spec = spec_for("exp:0.5")
    b = exp_B(0.5, y1, y1 * y1 + d)
    assert abs(spec.eval_B(y1, y1 * y1 + d) - b) <= 1e-10 * max(1.0, abs(b))


@given(x1=st.floats(-4, 4), x2=st.floats(-1, 1))
@settings(max_examples=60, deadline=None)
def test_quad_exact(x1, x2):
    assert abs(spec_for("quad").eval_V(x1, x2) - (x1 * x1 - x2 * x2 + 1)) <= 1e-10 * max(1.0, x1 * x1)


@pytest.mark.parametrize("fam", ["pmom:3", "pmom:1.5", "poly5:1.1", "poly5:2"])
@given(x1=st.floats(-4, 4), x2=st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_even_in_x2(fam, x1, x2):
    spec = spec_for(fam)
    a, b = spec.eval_V(x1, x2), spec.eval_V(x1, -x2)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("fam", ["pmom:3", "pmom:1.5"])
@given(x1=st.floats(-4, 4), x2=st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_even_boundary_gives_even_V(fam, x1, x2):
    spec = spec_for(fam)
    a, b = spec.eval_V(x1, x2), spec.eval_V(-x1, x2)
    assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


@pytest.mark.parametrize("fam", ["negexp:0.5", "pmom:3", "pmom:1.5", "poly5:1.1"])
def test_V_dominates_boundary_convex_combinations(fam):
    # splitting x along a diagonal to the lines x2 = +-1 is a two-point martingale;
    # V dominates the resulting average of f
    spec, bd = spec_for(fam), parse_family(fam)
    x1 = np.linspace(-3, 3, 61)
    for x2 in (0.0, 0.4, -0.7):
        wt, wb = (1 + x2) / 2, (1 - x2) / 2
        diag = wt * bd.f(x1 + 1 - x2) + wb * bd.f(x1 - 1 - x2)
        anti = wt * bd.f(x1 - 1 + x2) + wb * bd.f(x1 + 1 + x2)
        v = spec.eval_V(x1, np.full_like(x1, x2))
        assert np.all(v >= np.maximum(diag, anti) - 1e-10 * np.maximum(1, np.abs(v)))


def test_pmom3_square_vertex_and_value():
    spec = spec_for("pmom:3")
    assert spec.params["w"] == 0.0
    assert abs(spec.eval_V(0.0, 0.0) - 3.0) < 1e-6


def test_pmom2_value_at_origin():
    assert abs(spec_for("pmom:2").eval_V(0.0, 0.0) - 1.0) < 1e-12


def test_corner_parameters():
    spec = spec_for("poly5:1.1")
    p = spec.params
    assert p["orientation"] == "L"
    assert abs(p["b0"] - p["a0"] - p["ell0"]) < 1e-12
    assert p["ell0"] < 2


def test_balance_root_for_cubic_moment():
    bd = parse_family("pmom:3")
    mR = solve_m(bd, "R", (-np.inf, 1.0), check=False)
    mL = solve_m(bd, "L", (-1.0, np.inf), check=False)
    assert abs(solve_balance(bd, mR, mL, (-0.5, 0.7))) < 1e-12
    assert abs(balance_roots(bd, mR, mL, -0.9, 0.9)[0]) < 1e-12
    with pytest.raises(NoRootError):
        solve_balance(bd, mR, mL, (0.2, 0.8))


def test_explicit_builders_agree_with_auto():
    for fam, builder in (("exp:0.5", build_all_left), ("quad", build_all_right),
                         ("pmom:3", build_angle_square), ("pmom:1.5", build_symmetric_chord)):
        bd = parse_family(fam)
        x1 = np.linspace(-2, 2, 21)
        x2 = np.linspace(-1, 1, 21)
        assert np.max(np.abs(builder(bd).eval_V(x1, x2) - spec_for(fam).eval_V(x1, x2))) < 1e-12


def test_wrong_builder_raises():
    from bellman_strip import BellmanError
    with pytest.raises(BellmanError):
        build_all_right(parse_family("exp:0.5"))
    with pytest.raises(BellmanError):
        build_corner(parse_family("exp:0.5"))


def test_eval_outside_strip():
    spec = spec_for("quad")
    with pytest.raises(DomainError):
        spec.eval_V(0.0, 1.5)


def test_eval_B_outside_parabolic_strip():
    spec = spec_for("quad")
    with pytest.raises(DomainError):
        spec.eval_B(0.0, -0.1)
    with pytest.raises(DomainError):
        spec.eval_B(0.0, 1.5)


def test_coverage_error_when_no_piece_owns_the_point():
    from bellman_strip.foliation import FoliationSpec, Piece
    bd = parse_family("quad")
    fan = solve_m(bd, "R")
    spec = FoliationSpec(bd, "Custom", {}, (Piece("half fan", fan, (("vR", "<", 0.0),)),))
    assert abs(spec.eval_V(-2.0, 0.5) - (4 - 0.25 + 1)) < 1e-12
    with pytest.raises(CoverageError):
        spec.eval_V(1.0, 0.0)


def test_unsupported_boundary_data():
    # a cubic-like table with two sign changes of f''' is outside the built-in regimes
    t = np.linspace(-12, 12, 2401)
    bd = table(t, np.sin(2 * t) * 3)
    with pytest.raises(UnsupportedFoliationError):
        from bellman_strip.foliation import build_foliation_auto
        build_foliation_auto(bd)


@pytest.mark.parametrize("c", [2.0, 3.0, 4.5])
def test_poly5_balance_residual_closed_form(c):
    # the unbounded poly5 fans give m_R + m_L - 2 f' = 2 (w^2 - c + 2)
    bd = parse_family(f"poly5:{c}")
    mR = solve_m(bd, "R", check=False)
    mL = solve_m(bd, "L", check=False)
    w = np.linspace(-4, 4, 33)
    from bellman_strip.foliation import balance_residual
    assert np.max(np.abs(balance_residual(bd, mR, mL, w) - 2 * (w * w - c + 2))) < 1e-10
    roots = balance_roots(bd, mR, mL, -3.5, 3.5)
    if c > 2:
        assert np.allclose(sorted(roots), [-np.sqrt(c - 2), np.sqrt(c - 2)], atol=1e-12)
    else:
        # tangential double root
        assert np.allclose(roots, [0.0], atol=1e-12)
    # m_R'' = (u - 1)^2 + 1 - c > 0 far out, so the unbounded right fan never certifies
    u = np.array([-10.0, 10.0])
    assert np.allclose(mR.m2_at(u), (u - 1) ** 2 + 1 - c, atol=1e-9)


def test_poly5_has_no_angle_square():
    from bellman_strip import RegimeError
    with pytest.raises(RegimeError):
        build_angle_square(parse_family("poly5:3"))

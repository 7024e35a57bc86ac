import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellman_strip import DomainError, RegimeError, parse_family
from bellman_strip.foliation import certificate_violation, ode_residual, solve_m


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_exp_left_fan_matches_closed_slope(lam):
    # -m' + m = lam e^{lam t} has the bounded-at-+inf solution lam/(1-lam) e^{lam t}
    ts = solve_m(parse_family(f"exp:{lam}"), "L")
    u = np.linspace(-5, 5, 101)
    assert np.max(np.abs(ts.m_at(u) - lam / (1 - lam) * np.exp(lam * u))) < 1e-12


@pytest.mark.parametrize("lam", [0.25, 0.5])
def test_negexp_right_fan_matches_closed_slope(lam):
    # m' + m = -lam e^{lam t} from -inf: m = -lam/(1+lam) e^{lam t}
    ts = solve_m(parse_family(f"negexp:{lam}"), "R")
    u = np.linspace(-5, 5, 101)
    assert np.max(np.abs(ts.m_at(u) + lam / (1 + lam) * np.exp(lam * u))) < 1e-12


def test_quad_right_fan_slope():
    # m' + m = 2t from -inf: m = 2t - 2
    ts = solve_m(parse_family("quad"), "R")
    u = np.linspace(-4, 4, 17)
    assert np.max(np.abs(ts.m_at(u) - (2 * u - 2))) < 1e-12


def test_exp_right_fan_fails_certificate():
    with pytest.raises(RegimeError) as ei:
        solve_m(parse_family("exp:0.5"), "R")
    assert ei.value.where is not None


@pytest.mark.parametrize("fam,orient", [("exp:0.5", "L"), ("pmom:3", "R"), ("pmom:3", "L"), ("quad", "R")])
def test_quadrature_agrees_with_closed_form(fam, orient):
    bd = parse_family(fam)
    rng = (-math.inf, 0.0) if orient == "R" else (0.0, math.inf)
    closed = solve_m(bd, orient, rng, method="auto")
    quad = solve_m(bd, orient, rng, method="quad")
    u = quad.u[(quad.u > -6) & (quad.u < 6)]
    assert np.max(np.abs(closed.m_at(u) - quad.m_at(u))) < 1e-6 * max(1.0, np.max(np.abs(closed.m_at(u))))


@pytest.mark.parametrize("fam,orient", [("exp:0.5", "L"), ("negexp:0.5", "R"), ("pmom:3", "R")])
def test_ode_residual_small(fam, orient):
    rng = (-math.inf, 0.0) if orient == "R" else (-3.0, math.inf)
    ts = solve_m(parse_family(fam), orient, rng)
    assert ode_residual(ts) < 1e-5


def test_bounded_fan_needs_initial_value():
    bd = parse_family("poly5:1.1")
    with pytest.raises(DomainError):
        solve_m(bd, "L", (-1.0, 1.0))
    with pytest.raises(DomainError):
        solve_m(parse_family("exp:0.5"), "L", (0.0, math.inf), initial=(0.0, 1.0))
    with pytest.raises(DomainError):
        solve_m(bd, "X")


def test_initial_value_is_honoured():
    bd = parse_family("quad")
    ts = solve_m(bd, "R", (0.0, 2.0), initial=(0.0, -2.0), check=False)
    assert abs(ts.m_at(0.0) + 2.0) < 1e-12
    # with m(0) = -2 the solution coincides with the unbounded one, 2t - 2
    assert abs(ts.m_at(1.5) - 1.0) < 1e-9


@given(x1=st.floats(-4, 4), q=st.floats(0, 1))
@settings(max_examples=60, deadline=None)
def test_fan_value_reaches_boundary_data_at_depth_zero(x1, q):
    bd = parse_family("exp:0.5")
    ts = solve_m(bd, "L")
    assert abs(ts.value(x1, 0.0) - bd.f(x1)) < 1e-12 * max(1, bd.f(x1))
    # affine along the segment x1 - q = v
    v = x1 - q
    assert abs(ts.value(x1, q) - (ts.m_at(v) * q + bd.f(v))) < 1e-12 * max(1.0, abs(ts.value(x1, q)))


def test_certificate_violation_none_on_valid_fan():
    assert certificate_violation(solve_m(parse_family("exp:0.5"), "L")) is None


@pytest.mark.parametrize("p", [1.5, 3.0, 7.3])
def test_pmom_slope_finite_near_zero(p):
    bd = parse_family(f"pmom:{p}")
    for orient in ("R", "L"):
        ts = solve_m(bd, orient, check=False)
        v = ts.m_at(np.array([-1e-300, -1e-200, 0.0, 1e-200, 1e-300]))
        assert np.all(np.isfinite(v))
        assert np.max(np.abs(v - ts.m_at(0.0))) < 1e-12 * max(1.0, abs(ts.m_at(0.0)))

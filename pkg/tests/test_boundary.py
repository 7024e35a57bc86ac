import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellman_strip import FAMILY_GRAMMAR, DomainError, parse_family, table
from bellman_strip.boundary import min_on

FAMILIES = ["exp:0.5", "negexp:0.3", "pmom:3", "pmom:1.5", "poly5:1.1", "quad"]


def test_closed_forms_at_sample_points():
    t = np.array([-2.0, -0.5, 0.0, 0.7, 3.0])
    assert np.allclose(parse_family("exp:0.5").f(t), np.exp(0.5 * t), rtol=0, atol=1e-15)
    assert np.allclose(parse_family("negexp:0.5").f(t), -np.exp(0.5 * t), rtol=0, atol=1e-15)
    assert np.allclose(parse_family("pmom:3").f(t), np.abs(t) ** 3, rtol=0, atol=1e-14)
    assert np.allclose(parse_family("poly5:2").f(t), t**5 / 60 - 2 * t**3 / 6, rtol=0, atol=1e-14)
    assert np.array_equal(parse_family("quad").f(t), t * t)


@pytest.mark.parametrize("fam", FAMILIES)
@given(t=st.floats(-4, 4).filter(lambda s: abs(s) > 1e-2))
@settings(max_examples=40, deadline=None)
def test_derivatives_match_central_differences(fam, t):
    bd = parse_family(fam)
    h = 1e-5
    for lower, upper in ((bd.f, bd.f1), (bd.f1, bd.f2), (bd.f2, bd.f3)):
        fd = (lower(t + h) - lower(t - h)) / (2 * h)
        assert abs(fd - upper(t)) <= 1e-5 * max(1.0, abs(upper(t)))


@pytest.mark.parametrize("spec", ["exp:0.5", "negexp:0.25", "pmom:3", "poly5:1.1", "quad"])
def test_spec_round_trip(spec):
    assert parse_family(spec).spec() == spec


@pytest.mark.parametrize("bad", ["exp:1.5", "exp:0", "negexp:-0.1", "pmom:0.5", "quad:2", "cosh:1",
                                 "exp:abc", "exp:nan", "table:", "poly5"])
def test_malformed_family_raises(bad):
    with pytest.raises(DomainError):
        parse_family(bad)


def test_grammar_lists_every_family():
    for name in ("exp", "negexp", "pmom", "poly5", "quad", "table"):
        assert name in FAMILY_GRAMMAR


def test_table_family_interpolates_and_guards_range(tmp_path):
    t = np.linspace(-3, 3, 61)
    bd = table(t, t**2)
    assert bd.domain == (-3.0, 3.0)
    assert abs(bd.f(0.55) - 0.55**2) < 1e-3
    with pytest.raises(DomainError):
        bd.f(3.5)
    path = tmp_path / "f.csv"
    path.write_text("t,f\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(t.tolist(), (t**2).tolist())))
    bd2 = parse_family(f"table:{path}")
    assert np.array_equal(bd2.f(t), t**2)


@pytest.mark.parametrize("t,y", [([0, 1, 2], [0, 1, 4]), ([0, 2, 1, 3], [0, 0, 0, 0])])
def test_table_rejects_bad_samples(t, y):
    with pytest.raises(DomainError):
        table(t, y)


def test_pmom_even_and_singular_second_derivative():
    bd = parse_family("pmom:1.5")
    assert bd.is_even
    t = np.linspace(0.1, 3, 7)
    assert np.array_equal(bd.f(t), bd.f(-t))
    with pytest.raises(DomainError):
        bd.f2(0.0)


def test_min_on_scan():
    assert min_on(parse_family("quad"), -1, 2) == 0.0
    bd = parse_family("poly5:2")
    m = min_on(bd, -3, 3)
    assert math.isclose(m, float(np.min(bd.f(np.linspace(-3, 3, 6001)))), abs_tol=0)

import numpy as np
import pytest

from bellman_strip import DegenerateChordError, DomainError, parse_family
from bellman_strip.foliation import (A_residual, cup_origins, cup_residual, differentials, grow_cup, solve_A,
                                     solve_cup)


def pmom_A(p, ell):
    """Spine values for |t|^p with the outer chord [-1, 1] and A(2) = 1."""
    return ell / 2 + 2.0**-p * ell / (p - 1) * (2.0 ** (p - 1) - ell ** (p - 1))


@pytest.fixture(scope="module")
def pmom15():
    bd = parse_family("pmom:1.5")
    ch = solve_cup(bd, (-1.0, 1.0))
    return bd, solve_A(ch, 1.0)


def test_symmetric_chords(pmom15):
    _, ch = pmom15
    assert np.max(np.abs(ch.a + ch.b)) <= 1e-12


def test_pmom_spine_values(pmom15):
    _, ch = pmom15
    ell = np.linspace(0.1, 2.0, 191)
    assert np.max(np.abs(ch.A_at(ell) - pmom_A(1.5, ell))) < 1e-8


def test_A_transport_residual(pmom15):
    _, ch = pmom15
    assert A_residual(ch) < 1e-5


def test_differentials_negative_inside(pmom15):
    _, ch = pmom15
    pos = ch.ell > 0
    assert np.all(ch.DL[pos] < 0) and np.all(ch.DR[pos] < 0)


def test_cup_equation_along_grown_family():
    bd = parse_family("poly5:1.1")
    (origin,) = [o for o in cup_origins(bd) if o < 0]
    # f''' = t^2 - c changes sign from + to - at -sqrt(c)
    assert abs(origin + np.sqrt(1.1)) < 1e-12
    ch = grow_cup(bd, origin, 1.5)
    r = cup_residual(bd, ch.a[1:], ch.b[1:])
    assert np.max(np.abs(r)) < 1e-10
    assert np.all(np.diff(ch.a) < 0) and np.all(np.diff(ch.b) > 0)
    dl, dr = differentials(bd, ch.a[1:], ch.b[1:])
    assert np.all(dl < 0) and np.all(dr < 0)


def test_solve_cup_continues_back_to_origin():
    bd = parse_family("poly5:1.1")
    origin = -np.sqrt(1.1)
    grown = grow_cup(bd, origin, 1.0)
    ch = solve_cup(bd, (grown.a0, grown.b0))
    assert abs(ch.a[0] - origin) < 1e-6
    ell = np.linspace(0.2, 1.0, 9)
    assert np.max(np.abs(ch.a_at(ell) - grown.a_at(ell))) < 1e-7


def test_solve_cup_rejects_non_cup_chord():
    with pytest.raises(DomainError):
        solve_cup(parse_family("poly5:1.1"), (-2.0, -1.0))
    with pytest.raises(DomainError):
        solve_cup(parse_family("pmom:1.5"), (-1.5, 1.5))


def test_chord_lookup_inverts_endpoints(pmom15):
    _, ch = pmom15
    ell, a, b = ch.chord_from_a(np.array([-0.9, -0.3]))
    assert np.allclose(a, [-0.9, -0.3], atol=1e-12) and np.allclose(ell, [1.8, 0.6], atol=1e-9)
    ell, a, b = ch.chord_from_b(np.array([0.25]))
    assert np.allclose(ell, [0.5], atol=1e-9)

"""Regime builders and the automatic dispatcher.

Each builder assembles the pieces of one foliation pattern, runs the
concavity certificates of every fan and chord family it uses, and returns a
:class:`FoliationSpec`.  A failing certificate raises one of the
:class:`BellmanError` subclasses, which the dispatcher treats as "try the
next regime".
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ..boundary import BoundaryData
from ..errors import (BellmanError, DegenerateChordError, DomainError, NoRootError,
                      RegimeError, UnsupportedFoliationError)
from .chords import (DEFAULT_HL, Herringbone, cup_origins, cup_residual, grow_cup, project,
                     solve_A, solve_cup)
from .fans import DEFAULT_HU, DEFAULT_WINDOW, LEFT, RIGHT, TangentSolution, solve_m
from .patches import (angle_coeffs, balance_residual, corner_coeffs, corner_gluing_slopes,
                      square_coeffs, trolleybus_coeffs)
from .spec import FoliationSpec, Interface, Piece


# -- balance equation ------------------------------------------------------------
def solve_balance(bd: BoundaryData, mR: TangentSolution, mL: TangentSolution, bracket) -> float:
    """Root of ``r(w) = m_R(w) + m_L(w) - 2 f'(w)`` on ``bracket``.

    Bisection (Brent) to machine precision, then Newton polish using
    ``r'(w) = m_L(w) - m_R(w) - 2 f''(w)`` (from the two fan ODEs).

    Raises
    ------
    NoRootError
        If ``r`` does not change sign on the bracket.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    r = lambda w: float(balance_residual(bd, mR, mL, w))
    rlo, rhi = r(lo), r(hi)
    if rlo == 0.0:
        return lo
    if rhi == 0.0:
        return hi
    if rlo * rhi > 0:
        raise NoRootError(f"balance residual has no sign change on [{lo:.6g}, {hi:.6g}]")
    w = brentq(r, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    for _ in range(3):
        rw = r(w)
        if abs(rw) <= 1e-12 * max(1.0, abs(float(bd.f1(w)))):
            break
        d = float(mL.m_at(w)) - float(mR.m_at(w)) - 2.0 * float(bd.f2(w))
        if d == 0.0:
            break
        wn = w - rw / d
        if not lo <= wn <= hi:
            break
        w = wn
    rw = r(w)
    if abs(rw) > 1e-12 * max(1.0, abs(float(bd.f1(w)))) and abs(rw) > 1e-10:
        raise NoRootError(f"balance residual {rw:.3g} at w = {w:.12g} above tolerance")
    return w


def balance_roots(bd: BoundaryData, mR: TangentSolution, mL: TangentSolution,
                  lo: float, hi: float, step: float = 1e-2) -> list[float]:
    """All sign-change roots of the balance residual on ``[lo, hi]``, nearest to 0 first."""
    ws = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    r = np.asarray(balance_residual(bd, mR, mL, ws), float)
    roots = []
    for i in np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) <= 0):
        if r[i] == 0 and i > 0 and r[i - 1] == 0:
            continue
        try:
            roots.append(solve_balance(bd, mR, mL, (ws[i], ws[i + 1])))
        except NoRootError:
            pass
    return sorted(set(roots), key=abs)


# -- helpers ---------------------------------------------------------------------------
def _spine(k, hb: Herringbone, ell_lo: float = 0.0):
    """Spine interface of piece ``k`` from ``P(ell_lo)`` to ``P(ell0)``."""
    ch = hb.chord
    mid = lambda l: float(ch.a_at(l) + l / 2.0)
    lo = max(ell_lo, ch.ell1)
    return Interface(k, k, (mid(lo), lo / 2.0), (mid(ch.ell0), ch.ell0 / 2.0), (1.0, 0.0), "spine", "spine")


def _diag(i, j, foot, kind, end_q=1.0, start=None, label=""):
    """Segment of the line ``v_R = foot`` (kind "R") or ``v_L = foot`` (kind "L")."""
    if kind == "R":
        p = lambda q: foot - q
        normal = (1.0, 1.0)
    else:
        p = lambda q: foot + q
        normal = (1.0, -1.0)
    q0 = 0.0 if start is None else start
    return Interface(i, j, (p(q0), q0), (p(end_q), end_q), normal, "line", label)


# -- single-fan regimes --------------------------------------------------------------
def build_all_right(bd: BoundaryData, h_u: float = DEFAULT_HU, window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """Whole strip foliated by right tangents (``m'' <= 0`` on the line)."""
    ts = solve_m(bd, RIGHT, h_u=h_u, window=window)
    return FoliationSpec(bd, "AllRight", {}, (Piece("right fan", ts),))


def build_all_left(bd: BoundaryData, h_u: float = DEFAULT_HU, window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """Whole strip foliated by left tangents (``m'' >= 0`` on the line)."""
    ts = solve_m(bd, LEFT, h_u=h_u, window=window)
    return FoliationSpec(bd, "AllLeft", {}, (Piece("left fan", ts),))


# -- angle / square ----------------------------------------------------------------------
def _angle_pieces(bd, w, mR, mL, k0=0):
    sq = square_coeffs(bd, w, mR, mL)
    pieces = (
        Piece("right fan", mR, (("vR", "<", w),)),
        Piece("left fan", mL, (("vL", ">", w),)),
        Piece("square", sq, (), angle_coeffs(bd, w, mR, mL)),
    )
    interfaces = (
        _diag(k0, k0 + 2, w, "R", label="right fan | square"),
        _diag(k0 + 2, k0 + 1, w, "L", label="square | left fan"),
    )
    return pieces, interfaces


def build_angle_square(bd: BoundaryData, w: Optional[float] = None, bracket=None,
                       h_u: float = DEFAULT_HU, window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """Right fan, square at ``w``, left fan.

    ``w`` is found from the balance equation on ``bracket`` (default: every
    sign change in the sampling window, nearest to the origin first).
    """
    mR_inf = solve_m(bd, RIGHT, h_u=h_u, window=window, check=False)
    mL_inf = solve_m(bd, LEFT, h_u=h_u, window=window, check=False)
    if w is not None:
        cands = [float(w)]
    elif bracket is not None:
        cands = [solve_balance(bd, mR_inf, mL_inf, bracket)]
    else:
        lo, hi = bd.domain
        cands = balance_roots(bd, mR_inf, mL_inf, max(lo, -window + 1), min(hi, window - 1))
        if not cands:
            raise NoRootError("balance equation has no root in the sampling window")
    err: Optional[BellmanError] = None
    for wc in cands:
        try:
            mR = solve_m(bd, RIGHT, (-math.inf, wc), h_u=h_u, window=window)
            mL = solve_m(bd, LEFT, (wc, math.inf), h_u=h_u, window=window)
        except RegimeError as e:
            err = e
            continue
        pieces, interfaces = _angle_pieces(bd, wc, mR, mL)
        return FoliationSpec(bd, "AngleSquare", {"w": wc}, pieces, interfaces)
    raise err


# -- cup of full length flanked by fans ------------------------------------------------
def _full_cup(bd: BoundaryData, h_l: float):
    """Chord family with outer chord of length 2 and its spine values."""
    if bd.is_even:
        a0, b0 = -1.0, 1.0
    else:
        found = None
        for s in cup_origins(bd, *_origin_window(bd)):
            g = grow_cup(bd, s, 2.0, h_l)
            if not g.terminated:
                found = (g.a0, g.b0)
                break
        if found is None:
            raise DegenerateChordError("no cup reaches length 2")
        a0 = project(bd, 2.0, found[0])
        b0 = a0 + 2.0
    ch = solve_cup(bd, (a0, b0), 0.0, h_l)
    fa, fb = float(bd.f(a0)), float(bd.f(b0))
    ch = solve_A(ch, 0.5 * (fa + fb))
    return Herringbone(ch), 0.5 * (fb - fa)


def _origin_window(bd, window=DEFAULT_WINDOW):
    lo, hi = bd.domain
    return max(lo, -window), min(hi, window)


def build_symmetric_chord(bd: BoundaryData, h_u: float = DEFAULT_HU, h_l: float = DEFAULT_HL,
                          window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """Full chordal domain over ``[a0, a0 + 2]`` with a left fan on the left and a right fan on the right.

    For even ``f`` the outer chord is ``[-1, 1]``.  The fans start with slope
    ``(f(b0) - f(a0))/2`` at the chord ends.
    """
    hb, m0 = _full_cup(bd, h_l)
    a0, b0 = hb.a0, hb.b0
    fl = solve_m(bd, LEFT, (-math.inf, a0), (a0, m0), h_u=h_u, window=window)
    fr = solve_m(bd, RIGHT, (b0, math.inf), (b0, m0), h_u=h_u, window=window)
    pieces = (
        Piece("herringbone", hb, (("tri", "in", None),)),
        Piece("left fan", fl, (("vL", "<", a0),)),
        Piece("right fan", fr, ()),
    )
    interfaces = (
        _diag(1, 0, a0, "L", label="left fan | herringbone"),
        _diag(0, 2, b0, "R", label="herringbone | right fan"),
        _spine(0, hb),
    )
    return FoliationSpec(bd, "SymmetricChord", {"a0": a0, "b0": b0}, pieces, interfaces)


# -- corner ---------------------------------------------------------------------------
def _corner_root(bd, g, orientation, mInf: TangentSolution):
    """Smallest chord length at which the unbounded fan meets the corner gluing slope."""
    def F(ell, a_guess):
        a = project(bd, ell, a_guess)
        b = a + ell
        sa, sb = corner_gluing_slopes(bd, a, b, orientation)
        if orientation == LEFT:
            return float(mInf.m_at(b)) - sb, a
        return float(mInf.m_at(a)) - sa, a

    ells = g.ell
    k0 = max(2, int(0.02 * ells.size))
    prev = None
    for k in range(k0, ells.size):
        val, _ = F(ells[k], g.a[k])
        if prev is not None and prev[1] * val <= 0:
            k1 = prev[0]
            guess = lambda l: float(np.interp(l, ells, g.a))
            ell0 = brentq(lambda l: F(l, guess(l))[0], ells[k1], ells[k], xtol=1e-14, rtol=1e-15)
            a0 = project(bd, ell0, guess(ell0))
            return ell0, a0
        prev = (k, val)
    raise NoRootError("corner gluing equation has no root on the grown cup")


def build_corner(bd: BoundaryData, orientation: str = LEFT, h_u: float = DEFAULT_HU,
                 h_l: float = DEFAULT_HL, window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """Cup of length ``l0 < 2`` topped by a corner, between two fans of one orientation.

    Left corner: left fan up to ``a0`` (slope ``f' + <f''>`` there), the
    herringbone, the corner over ``[a0, b0]``, and the unbounded left fan
    from ``b0``.  ``l0`` solves ``m_L(b0) = f'(b0) + <f''>`` for the
    unbounded fan.  The right corner is the mirror image.
    """
    if orientation not in (LEFT, RIGHT):
        raise DomainError("orientation must be 'L' or 'R'")
    mInf = solve_m(bd, orientation, h_u=h_u, window=window, check=False)
    err: BellmanError = NoRootError("no cup origin")
    for s in cup_origins(bd, *_origin_window(bd, window)):
        try:
            g = grow_cup(bd, s, 2.0, h_l)
            ell0, a0 = _corner_root(bd, g, orientation, mInf)
            if ell0 >= 2.0:
                raise NoRootError("corner chord reaches length 2")
            b0 = a0 + ell0
            ch = solve_cup(bd, (a0, b0), 0.0, h_l)
            cp = corner_coeffs(bd, a0, b0)
            mid = 0.5 * (a0 + b0)
            ch = solve_A(ch, float(cp.value(mid, ell0 / 2.0)))
            hb = Herringbone(ch)
            sa, sb = corner_gluing_slopes(bd, a0, b0, orientation)
            if orientation == LEFT:
                f1 = solve_m(bd, LEFT, (-math.inf, a0), (a0, sa), h_u=h_u, window=window)
                f2 = solve_m(bd, LEFT, (b0, math.inf), h_u=h_u, window=window)
                rules = ((("vL", "<", a0),), (("vL", ">", b0),))
            else:
                f1 = solve_m(bd, RIGHT, (-math.inf, a0), h_u=h_u, window=window)
                f2 = solve_m(bd, RIGHT, (b0, math.inf), (b0, sb), h_u=h_u, window=window)
                rules = ((("vR", "<", a0),), (("vR", ">", b0),))
        except BellmanError as e:
            err = e
            continue
        pieces = (
            Piece("herringbone", hb, (("tri", "in", None),)),
            Piece("fan below", f1, rules[0]),
            Piece("fan above", f2, rules[1]),
            Piece("corner", cp, (), trolleybus_coeffs(bd, a0, b0)),
        )
        q0 = ell0 / 2.0
        if orientation == LEFT:
            interfaces = (
                _diag(1, 0, a0, "L", end_q=q0, label="fan | herringbone"),
                _diag(1, 3, a0, "L", start=q0, label="fan | corner"),
                _diag(0, 3, b0, "R", end_q=q0, label="herringbone | corner"),
                _diag(3, 2, b0, "L", label="corner | fan"),
                _spine(0, hb),
            )
        else:
            interfaces = (
                _diag(0, 2, b0, "R", end_q=q0, label="herringbone | fan"),
                _diag(3, 2, b0, "R", start=q0, label="corner | fan"),
                _diag(3, 0, a0, "L", end_q=q0, label="corner | herringbone"),
                _diag(1, 3, a0, "R", label="fan | corner"),
                _spine(0, hb),
            )
        params = {"a0": a0, "b0": b0, "ell0": ell0, "orientation": orientation}
        return FoliationSpec(bd, "CornerRegime", params, pieces, interfaces)
    raise err


# -- full cup next to an angle --------------------------------------------------------
def build_cup_angle(bd: BoundaryData, side: str = "right", h_u: float = DEFAULT_HU,
                    h_l: float = DEFAULT_HL, window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """Full-length cup with an angle on one side.

    ``side="right"``: left fan up to ``a0``, herringbone, right fan on
    ``[b0, w]`` started with slope ``(f(b0) - f(a0))/2``, square at ``w``,
    unbounded left fan beyond ``w``.  ``side="left"`` is the mirror image.
    """
    if side not in ("right", "left"):
        raise DomainError("side must be 'right' or 'left'")
    hb, m0 = _full_cup(bd, h_l)
    a0, b0 = hb.a0, hb.b0
    lo, hi = _origin_window(bd, window - 1)
    if side == "right":
        fl = solve_m(bd, LEFT, (-math.inf, a0), (a0, m0), h_u=h_u, window=window)
        mR = solve_m(bd, RIGHT, (b0, hi), (b0, m0), h_u=h_u, window=window, check=False)
        mL = solve_m(bd, LEFT, h_u=h_u, window=window, check=False)
        roots = [w for w in balance_roots(bd, mR, mL, b0, hi) if w > b0]
        if not roots:
            raise NoRootError("no balance point to the right of the cup")
        w = min(roots)
        fr = solve_m(bd, RIGHT, (b0, w), (b0, m0), h_u=h_u, window=window)
        fl2 = solve_m(bd, LEFT, (w, math.inf), h_u=h_u, window=window)
        pieces = (
            Piece("herringbone", hb, (("tri", "in", None),)),
            Piece("left fan", fl, (("vL", "<", a0),)),
            Piece("right fan", fr, (("vR", "<", w),)),
            Piece("left fan beyond", fl2, (("vL", ">", w),)),
            Piece("square", square_coeffs(bd, w, fr, fl2), (), angle_coeffs(bd, w, fr, fl2)),
        )
        interfaces = (
            _diag(1, 0, a0, "L", label="left fan | herringbone"),
            _diag(0, 2, b0, "R", label="herringbone | right fan"),
            _diag(2, 4, w, "R", label="right fan | square"),
            _diag(4, 3, w, "L", label="square | left fan"),
            _spine(0, hb),
        )
    else:
        fr = solve_m(bd, RIGHT, (b0, math.inf), (b0, m0), h_u=h_u, window=window)
        mL = solve_m(bd, LEFT, (lo, a0), (a0, m0), h_u=h_u, window=window, check=False)
        mR = solve_m(bd, RIGHT, h_u=h_u, window=window, check=False)
        roots = [w for w in balance_roots(bd, mR, mL, lo, a0) if w < a0]
        if not roots:
            raise NoRootError("no balance point to the left of the cup")
        w = max(roots)
        fl = solve_m(bd, LEFT, (w, a0), (a0, m0), h_u=h_u, window=window)
        fr2 = solve_m(bd, RIGHT, (-math.inf, w), h_u=h_u, window=window)
        pieces = (
            Piece("herringbone", hb, (("tri", "in", None),)),
            Piece("right fan", fr, (("vR", ">", b0),)),
            Piece("right fan beyond", fr2, (("vR", "<", w),)),
            Piece("left fan", fl, (("vL", ">", w),)),
            Piece("square", square_coeffs(bd, w, fr2, fl), (), angle_coeffs(bd, w, fr2, fl)),
        )
        interfaces = (
            _diag(3, 0, a0, "L", label="left fan | herringbone"),
            _diag(0, 1, b0, "R", label="herringbone | right fan"),
            _diag(2, 4, w, "R", label="right fan | square"),
            _diag(4, 3, w, "L", label="square | left fan"),
            _spine(0, hb),
        )
    params = {"a0": a0, "b0": b0, "w": w, "side": side}
    return FoliationSpec(bd, "CupAngle", params, pieces, interfaces)


# -- dispatcher -------------------------------------------------------------------------
def build_foliation_auto(bd: BoundaryData, h_u: float = DEFAULT_HU, h_l: float = DEFAULT_HL,
                         window: float = DEFAULT_WINDOW) -> FoliationSpec:
    """First regime whose certificates pass.

    Order: AllRight, AllLeft, AngleSquare, SymmetricChord (even ``f``),
    CornerRegime (left, then right), CupAngle (angle right, then left).

    Raises
    ------
    UnsupportedFoliationError
        When none applies; the message lists each regime's failure.
    """
    attempts = [
        ("AllRight", lambda: build_all_right(bd, h_u, window)),
        ("AllLeft", lambda: build_all_left(bd, h_u, window)),
        ("AngleSquare", lambda: build_angle_square(bd, h_u=h_u, window=window)),
    ]
    if bd.is_even:
        attempts.append(("SymmetricChord", lambda: build_symmetric_chord(bd, h_u, h_l, window)))
    attempts += [
        ("CornerRegime(L)", lambda: build_corner(bd, LEFT, h_u, h_l, window)),
        ("CornerRegime(R)", lambda: build_corner(bd, RIGHT, h_u, h_l, window)),
        ("CupAngle(right)", lambda: build_cup_angle(bd, "right", h_u, h_l, window)),
        ("CupAngle(left)", lambda: build_cup_angle(bd, "left", h_u, h_l, window)),
    ]
    reasons = []
    for name, fn in attempts:
        try:
            return fn()
        except (BellmanError, ValueError) as e:
            reasons.append(f"  {name}: {e}")
    raise UnsupportedFoliationError(
        f"no supported regime certifies for {bd.spec()}; supply a Custom figure graph.\n" + "\n".join(reasons))

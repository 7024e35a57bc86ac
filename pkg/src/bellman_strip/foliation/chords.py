"""Chordal domains and vertical herringbones.

A chord ``[a, b]`` of the fixed parabola is admissible when it solves the
cup equation

    (f(b) - f(a)) / (b - a) = (f'(a) + f'(b)) / 2.

Chords are parametrised by their length ``l = b - a``.  The family is
continued by integrating ``a' = -DR / (DL + DR)``, ``b' = DL / (DL + DR)``
with a Newton corrector on the cup equation at fixed ``l``.

In the strip the chordal domain becomes a vertical herringbone: the function
is affine on the two legs joining ``(a, -1)`` and ``(b, -1)`` to the spine
point ``P(l) = ((a + b)/2, -1 + l/2)`` where it takes the value ``A(l)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from ..boundary import BoundaryData
from ..errors import DegenerateChordError, DomainError, StepSizeError
from .fans import _f1_raw, _f2_raw

DEFAULT_HL = 1e-3
TOL_CUP = 1e-10


def cup_residual(bd: BoundaryData, a, b):
    """``(f(b) - f(a))/(b - a) - (f'(a) + f'(b))/2``."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return (bd.f(b) - bd.f(a)) / (b - a) - 0.5 * (_f1_raw(bd, a) + _f1_raw(bd, b))


def differentials(bd: BoundaryData, a, b):
    """Return ``(DL, DR)`` for the chord ``[a, b]``.

    For ``|t|^p`` with a symmetric chord the closed form
    ``p (p - 2) (l/2)^(p-2)`` is used (it stays finite away from 0 and
    avoids evaluating the singular ``f''`` at the origin).
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    ell = b - a
    if bd.family == "pmom" and np.all(np.abs(a + b) <= 1e-13 * np.maximum(ell, 1e-300)):
        p = bd.param
        d = p * (p - 2.0) * (ell / 2.0) ** (p - 2.0)
        return d, d
    mean = (_f1_raw(bd, b) - _f1_raw(bd, a)) / ell
    return _f2_raw(bd, a) - mean, _f2_raw(bd, b) - mean


def _scale(bd, a, b):
    return max(1.0, abs(float(bd.f1(a))), abs(float(bd.f1(b))))


def project(bd: BoundaryData, ell: float, a_guess: float, maxit: int = 50) -> float:
    """Newton solve of the cup equation for ``a`` at fixed length ``ell``.

    ``d/da`` of the residual at fixed length is ``-(DL + DR)/2``.
    """
    a = float(a_guess)
    for _ in range(maxit):
        r = float(cup_residual(bd, a, a + ell))
        dl, dr = differentials(bd, a, a + ell)
        d = -0.5 * (float(dl) + float(dr))
        if d == 0.0 or not math.isfinite(d):
            raise StepSizeError(f"singular Newton step at l = {ell:.6g}")
        step = r / d
        if abs(step) > max(0.5 * ell, 1e-3):
            step = math.copysign(max(0.5 * ell, 1e-3), step)
        a -= step
        if abs(step) <= 4e-16 * max(1.0, abs(a)):
            return a
    r = float(cup_residual(bd, a, a + ell))
    if abs(r) <= TOL_CUP * _scale(bd, a, a + ell):
        return a
    raise StepSizeError(f"Newton projection did not converge at l = {ell:.6g} (residual {r:.3g})")


@dataclass(frozen=True)
class ChordalSolution:
    """Tabulated chord family on ``[ell1, ell0]`` (increasing ``ell``)."""

    bd: BoundaryData = field(repr=False)
    ell: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    DL: np.ndarray = field(repr=False)
    DR: np.ndarray = field(repr=False)
    A: Optional[np.ndarray] = field(default=None, repr=False)
    A0: Optional[float] = None
    terminated: bool = False  # continuation stopped at a degenerate chord

    def __post_init__(self):
        ell = self.ell
        object.__setattr__(self, "_a", PchipInterpolator(ell, self.a))
        # inverse maps; a decreases and b increases with ell
        object.__setattr__(self, "_ell_of_a", PchipInterpolator(self.a[::-1], ell[::-1]))
        object.__setattr__(self, "_ell_of_b", PchipInterpolator(self.b, ell))
        if self.A is not None:
            object.__setattr__(self, "_A", CubicSpline(ell, self.A))

    @property
    def ell0(self) -> float:
        return float(self.ell[-1])

    @property
    def ell1(self) -> float:
        return float(self.ell[0])

    @property
    def a0(self) -> float:
        return float(self.a[-1])

    @property
    def b0(self) -> float:
        return float(self.b[-1])

    @property
    def symmetric(self) -> bool:
        return self.bd.family == "pmom"

    def a_at(self, ell):
        ell = np.asarray(ell, float)
        if self.symmetric:
            return -ell / 2.0
        return self._a(ell)

    def b_at(self, ell):
        return self.a_at(ell) + np.asarray(ell, float)

    def A_at(self, ell):
        if self.A is None:
            raise DomainError("A has not been transported on this chord family")
        ell = np.asarray(ell, float)
        out = self._A(ell)
        # below the first positive node interpolate linearly to A(0) = f(origin)
        if self.ell[0] == 0.0 and self.ell.size > 1:
            h = self.ell[1]
            lin = self.A[0] + (self.A[1] - self.A[0]) * ell / h
            out = np.where(ell < h, lin, out)
        return out

    def _polish(self, a, b, fixed: str):
        # Newton on the cup equation in the free endpoint
        for _ in range(4):
            r = cup_residual(self.bd, a, b)
            dl, dr = differentials(self.bd, a, b)
            if fixed == "a":
                d = -0.5 * dr
                b = b - np.where(d != 0, r / np.where(d != 0, d, 1.0), 0.0)
            else:
                d = -0.5 * dl
                a = a - np.where(d != 0, r / np.where(d != 0, d, 1.0), 0.0)
        return a, b

    def chord_from_a(self, aval):
        """Chord ``(l, a, b)`` whose left endpoint is ``aval``."""
        aval = np.asarray(aval, float)
        if self.symmetric:
            return -2.0 * aval, aval, -aval
        ell = self._ell_of_a(aval)
        b = aval + ell
        pos = ell > 10 * (self.ell[1] - self.ell[0])
        if np.any(pos):
            _, bp = self._polish(aval, b, "a")
            b = np.where(pos, bp, b)
        return b - aval, aval, b

    def chord_from_b(self, bval):
        """Chord ``(l, a, b)`` whose right endpoint is ``bval``."""
        bval = np.asarray(bval, float)
        if self.symmetric:
            return 2.0 * bval, -bval, bval
        ell = self._ell_of_b(bval)
        a = bval - ell
        pos = ell > 10 * (self.ell[1] - self.ell[0])
        if np.any(pos):
            ap, _ = self._polish(a, bval, "b")
            a = np.where(pos, ap, a)
        return bval - a, a, bval


def _table(bd, ells, avals, terminated=False, A=None, A0=None):
    ells = np.asarray(ells, float)
    avals = np.asarray(avals, float)
    bvals = avals + ells
    dl = np.zeros_like(ells)
    dr = np.zeros_like(ells)
    pos = ells > 0
    dl[pos], dr[pos] = differentials(bd, avals[pos], bvals[pos])
    if bd.family == "pmom" and np.any(~pos):
        dl[~pos] = dr[~pos] = -math.inf if bd.param < 2 else 0.0
    return ChordalSolution(bd, ells, avals, bvals, dl, dr, A, A0, terminated)


def _check_signs(bd, ell, a, where):
    dl, dr = differentials(bd, a, a + ell)
    scale = max(1.0, abs(float(dl)), abs(float(dr)))
    if not (dl < -1e-14 * scale and dr < -1e-14 * scale):
        raise DegenerateChordError(
            f"differentials lost their sign at l = {ell:.6g} (DL = {float(dl):.3g}, DR = {float(dr):.3g}) [{where}]")


def solve_cup(bd: BoundaryData, boundary_chord, ell1: float = 0.0, h_l: float = DEFAULT_HL) -> ChordalSolution:
    """Continue the chord family from ``(a0, b0)`` down to length ``ell1``.

    Raises
    ------
    DomainError
        If ``(a0, b0)`` does not solve the cup equation or ``b0 - a0 > 2``.
    DegenerateChordError
        If DL or DR reaches zero along the way.
    StepSizeError
        If the Newton corrector fails.
    """
    a0, b0 = float(boundary_chord[0]), float(boundary_chord[1])
    ell0 = b0 - a0
    if not 0.0 < ell0 <= 2.0 + 1e-12:
        raise DomainError(f"chord length must lie in (0, 2], got {ell0}")
    if not 0.0 <= ell1 < ell0:
        raise DomainError("inner target must satisfy 0 <= l1 < l0")
    r = float(cup_residual(bd, a0, b0))
    if abs(r) > TOL_CUP * _scale(bd, a0, b0):
        raise DomainError(f"(a0, b0) violates the cup equation (residual {r:.3g})")
    n = max(2, int(math.ceil((ell0 - ell1) / h_l)))
    ells = np.linspace(ell1, ell0, n + 1)
    avals = np.empty_like(ells)
    avals[-1] = a0
    _check_signs(bd, ell0, a0, "outer chord")
    for k in range(n - 1, -1, -1):
        ell, ell_next = ells[k], ells[k + 1]
        a_next = avals[k + 1]
        if ell == 0.0:
            # the chord shrinks to the cup origin
            avals[k] = a_next + 0.5 * (ell_next - ell)
            continue
        dl, dr = differentials(bd, a_next, a_next + ell_next)
        slope = -float(dr) / (float(dl) + float(dr))
        a_pred = a_next - slope * (ell_next - ell)
        if bd.is_even and abs(a0 + b0) <= 1e-14 * ell0:
            avals[k] = -ell / 2.0
        else:
            avals[k] = project(bd, ell, a_pred)
        _check_signs(bd, ell, avals[k], "continuation")
    return _table(bd, ells, avals)


def cup_origins(bd: BoundaryData, lo: float = -12.0, hi: float = 12.0, h: float = 1e-3) -> list[float]:
    """Points where ``f'''`` changes sign from + to - (births of cups)."""
    lo, hi = max(lo, bd.domain[0]), min(hi, bd.domain[1])
    t = np.linspace(lo, hi, int(round((hi - lo) / h)) + 1)
    if bd.family == "pmom":
        return [0.0] if bd.param < 2 else []
    g = np.asarray(bd.f3(t), float)
    out = []
    for i in np.flatnonzero((g[:-1] > 0) & (g[1:] <= 0)):
        if g[i + 1] == 0:
            out.append(float(t[i + 1]))
        else:
            out.append(brentq(lambda s: float(bd.f3(s)), t[i], t[i + 1], xtol=1e-15))
    return out


def grow_cup(bd: BoundaryData, origin: float, ell_max: float = 2.0, h_l: float = DEFAULT_HL) -> ChordalSolution:
    """Grow the chord family from a cup origin up to ``ell_max``.

    Growth stops early (``terminated=True``) at the first chord whose
    differentials are not both negative.
    """
    n = max(2, int(math.ceil(ell_max / h_l)))
    ells = np.linspace(0.0, ell_max, n + 1)
    avals = [float(origin)]
    for k in range(1, n + 1):
        ell = ells[k]
        if k == 1:
            guess = origin - ell / 2.0
        elif k == 2:
            guess = avals[-1] - (ell - ells[k - 1]) / 2.0
        else:
            guess = 2 * avals[-1] - avals[-2]
        try:
            a = project(bd, ell, guess)
            _check_signs(bd, ell, a, "growth")
        except (DegenerateChordError, StepSizeError):
            if k < 3:
                raise
            return _table(bd, ells[:k], avals, terminated=True)
        avals.append(a)
    return _table(bd, ells, avals)


def solve_A(ch: ChordalSolution, A_at_ell0: float) -> ChordalSolution:
    """Transport the spine values ``A(l)`` inward from ``l0``.

    ``A(l) = (l/l0) A(l0) + l * int_l^{l0} g(s) / s^2 ds`` with
    ``g = (f(a) DL + f(b) DR) / (DL + DR)``, by cumulative Simpson
    quadrature on the chord grid.
    """
    bd = ch.bd
    ell = ch.ell
    pos = ell > 0
    den = ch.DL + ch.DR
    if np.any(den[pos] == 0):
        raise DegenerateChordError("DL + DR vanishes on the chord family")
    g = np.empty_like(ell)
    fa, fb = bd.f(ch.a), bd.f(ch.b)
    with np.errstate(invalid="ignore"):
        g[pos] = (fa[pos] * ch.DL[pos] + fb[pos] * ch.DR[pos]) / den[pos]
    ell0 = ell[-1]
    ip = np.flatnonzero(pos)
    # subtract g0 = g(l_first) and integrate g0 / s^2 exactly; what is left is
    # bounded near the cup origin, so Simpson does not oscillate there
    g0 = float(bd.f(ch.a[0])) if not pos[0] else float(g[ip[0]])
    # int_l^{l0} = total - int_{l_first}^{l} over the positive nodes
    cum = cumulative_simpson((g[ip] - g0) / ell[ip] ** 2, x=ell[ip], initial=0.0)
    integ = np.zeros(ell.size)
    integ[ip] = cum[-1] - cum
    A = np.empty_like(ell)
    A[pos] = ell[pos] / ell0 * A_at_ell0 + g0 * (1.0 - ell[pos] / ell0) + ell[pos] * integ[pos]
    A[~pos] = bd.f(ch.a[~pos])
    return replace(ch, A=A, A0=float(A_at_ell0))


def A_residual(ch: ChordalSolution) -> float:
    """Max residual of ``A' l - A + g`` at interior positive nodes."""
    ell = ch.ell
    pos = np.flatnonzero(ell > 0)[1:-1]
    dA = ch._A(ell[pos], 1)
    g = (ch.bd.f(ch.a[pos]) * ch.DL[pos] + ch.bd.f(ch.b[pos]) * ch.DR[pos]) / (ch.DL[pos] + ch.DR[pos])
    return float(np.max(np.abs(dA * ell[pos] - ch.A[pos] + g)))


@dataclass(frozen=True)
class Herringbone:
    """Vertical herringbone over a chord family with transported ``A``."""

    chord: ChordalSolution

    @property
    def a0(self):
        return self.chord.a0

    @property
    def b0(self):
        return self.chord.b0

    @property
    def ell0(self):
        return self.chord.ell0

    def left_value(self, p, q):
        """Formula of the half that meets the line at ``a = p - q``."""
        p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
        ell, a, _ = self.chord.chord_from_a(p - q)
        A = self.chord.A_at(ell)
        fa = self.chord.bd.f(a)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(ell > 0, fa + 2 * q / np.where(ell > 0, ell, 1.0) * (A - fa), fa)

    def right_value(self, p, q):
        p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
        ell, _, b = self.chord.chord_from_b(p + q)
        A = self.chord.A_at(ell)
        fb = self.chord.bd.f(b)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(ell > 0, fb + 2 * q / np.where(ell > 0, ell, 1.0) * (A - fb), fb)

    def contains(self, p, q, eps=1e-12):
        mid = 0.5 * (self.a0 + self.b0)
        return q <= self.ell0 / 2 - np.abs(p - mid) + eps

    def on_left_half(self, p, q):
        p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
        a = p - q
        ch = self.chord
        # only left endpoints of the family can own the left half
        inside = (a >= ch.a0 - 1e-12) & (a <= ch.a[0])
        out = np.zeros(p.shape, bool)
        if np.any(inside):
            ell, _, _ = ch.chord_from_a(a[inside])
            out[inside] = q[inside] <= ell / 2 + 1e-13
        return out

    def value(self, p, q):
        p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
        out = np.empty(p.shape)
        left = self.on_left_half(p, q)
        if np.any(left):
            out[left] = self.left_value(p[left], q[left])
        if np.any(~left):
            out[~left] = self.right_value(p[~left], q[~left])
        return out

    # -- parabolic-strip side ------------------------------------------------
    def omega_contains(self, y1, y2, eps=1e-12):
        a0, b0 = self.a0, self.b0
        return (y1 >= a0 - eps) & (y1 <= b0 + eps) & (y2 <= (a0 + b0) * y1 - a0 * b0 + eps)

    def omega_value(self, y1, y2):
        """Affine interpolation of f along the chord through ``(y1, y2)``."""
        y1, y2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        out = np.empty(y1.shape)
        ch = self.chord
        for i, (s, t) in enumerate(zip(y1.ravel(), y2.ravel())):
            def h(ell):
                a = float(ch.a_at(ell))
                return (2 * a + ell) * s - a * (a + ell) - t
            lo = ch.ell1
            hlo, hhi = h(lo), h(ch.ell0)
            if hlo >= 0:
                ell = lo
            elif hhi <= 0:
                ell = ch.ell0
            else:
                ell = brentq(h, lo, ch.ell0, xtol=1e-15, rtol=1e-15)
            a = float(ch.a_at(ell))
            b = a + ell
            if ell <= 0:
                out.flat[i] = float(ch.bd.f(a))
                continue
            beta = min(max((s - a) / ell, 0.0), 1.0)
            out.flat[i] = (1 - beta) * float(ch.bd.f(a)) + beta * float(ch.bd.f(b))
        return out

"""Linearity domains: angle/square and trolleybus/corner coefficients.

In the parabolic strip the function is affine, ``B = b2 y2 + b1 y1 + b0``;
in the strip it is bilinear, ``V = a11 (x1^2 - x2^2) + a1 x1 + a0``.
The strip coefficients follow from the parabolic ones by
``a11 = b2, a1 = b1, a0 = b0 + b2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..boundary import BoundaryData
from .fans import TangentSolution


@dataclass(frozen=True)
class BilinearPatch:
    alpha11: float
    alpha1: float
    alpha0: float
    kind: str = "square"

    def value_x(self, x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        return self.alpha11 * (x1 * x1 - x2 * x2) + self.alpha1 * x1 + self.alpha0

    def value(self, p, q):
        """Value at first coordinate ``p`` and depth ``q = 1 - |x2|``."""
        q = np.asarray(q, float)
        return self.value_x(p, 1.0 - q)


@dataclass(frozen=True)
class AffinePatch:
    beta0: float
    beta1: float
    beta2: float
    kind: str = "angle"

    def value_y(self, y1, y2):
        return self.beta2 * np.asarray(y2, float) + self.beta1 * np.asarray(y1, float) + self.beta0


def to_bilinear(ap: AffinePatch, kind: str) -> BilinearPatch:
    return BilinearPatch(ap.beta2, ap.beta1, ap.beta0 + ap.beta2, kind)


def balance_residual(bd: BoundaryData, mR: TangentSolution, mL: TangentSolution, w):
    """``m_R(w) + m_L(w) - 2 f'(w)``."""
    return mR.m_at(w) + mL.m_at(w) - 2.0 * np.asarray(bd.f1(w))


def angle_coeffs(bd: BoundaryData, w: float, mR: TangentSolution, mL: TangentSolution) -> AffinePatch:
    """Affine function on the angle with vertex ``(w, w^2)``."""
    b2 = (float(mL.m_at(w)) - float(mR.m_at(w))) / 4.0
    f1 = float(bd.f1(w))
    b1 = f1 - 2.0 * b2 * w
    b0 = float(bd.f(w)) - w * f1 + b2 * w * w
    return AffinePatch(b0, b1, b2, "angle")


def square_coeffs(bd: BoundaryData, w: float, mR: TangentSolution, mL: TangentSolution) -> BilinearPatch:
    """Bilinear function on the square ``|x1 - w| + |x2| <= 1``."""
    return to_bilinear(angle_coeffs(bd, w, mR, mL), "square")


def _means(bd: BoundaryData, a0: float, b0: float):
    ell = b0 - a0
    mf1 = (float(bd.f(b0)) - float(bd.f(a0))) / ell
    mf2 = (float(bd.f1(b0)) - float(bd.f1(a0))) / ell
    return mf1, mf2


def trolleybus_coeffs(bd: BoundaryData, a0: float, b0: float) -> AffinePatch:
    """Affine function on a trolleybus resting on the chord ``[a0, b0]``."""
    mf1, mf2 = _means(bd, a0, b0)
    b2 = 0.5 * mf2
    b1 = mf1 - 0.5 * (a0 + b0) * mf2
    b0_ = (b0 * float(bd.f(a0)) - a0 * float(bd.f(b0))) / (b0 - a0) + 0.5 * a0 * b0 * mf2
    return AffinePatch(b0_, b1, b2, "trolleybus")


def corner_coeffs(bd: BoundaryData, a0: float, b0: float) -> BilinearPatch:
    """Bilinear function on the corner over the chord ``[a0, b0]``."""
    return to_bilinear(trolleybus_coeffs(bd, a0, b0), "corner")


def corner_gluing_slopes(bd: BoundaryData, a0: float, b0: float, orientation: str):
    """Fan slopes at ``a0`` and ``b0`` required for C^1 gluing to a corner.

    Left corners need ``m_L = f' + <f''>``; right corners ``m_R = f' - <f''>``.
    """
    _, mf2 = _means(bd, a0, b0)
    s = 1.0 if orientation == "L" else -1.0
    return float(bd.f1(a0)) + s * mf2, float(bd.f1(b0)) + s * mf2


def multifigure_coeffs(bd: BoundaryData, points, interval) -> AffinePatch:
    """Affine coefficients of a linearity domain touching the fixed boundary.

    ``points`` are the contact abscissae (at least two).  The quadratic
    coefficient is half the mean of ``f''`` over ``interval``; it is an
    explicit argument because the two displayed gluing rules for
    multi-point domains use different left endpoints.  ``b1`` and ``b0``
    are then fixed by least squares on ``f(t) = b0 + b1 t + b2 t^2`` at
    the contact points (exact when the data are compatible).
    """
    pts = np.asarray(points, float)
    lo, hi = float(interval[0]), float(interval[1])
    b2 = 0.5 * (float(bd.f1(hi)) - float(bd.f1(lo))) / (hi - lo)
    rhs = np.asarray(bd.f(pts), float) - b2 * pts**2
    M = np.vstack([np.ones_like(pts), pts]).T
    (b0, b1), *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return AffinePatch(float(b0), float(b1), b2, "multifigure")

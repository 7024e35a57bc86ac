"""Tangent fans (horizontal herringbones).

On a right fan the function is affine along the segments ``x1 + y = v``
(``y = 1 - |x2|``), on a left fan along ``x1 - y = v``; in both cases

    V = m(v) (x1 - v) + f(v).

The slope ``m`` solves ``m' + m = f'`` (right) or ``-m' + m = f'`` (left).
Along a solution ``m''`` reduces to ``f'' - f' + m`` (right) and
``m - f' - f''`` (left); the fan is concave iff the former is <= 0,
respectively the latter >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import hyp1f1, hyperu, gamma

from ..boundary import BoundaryData
from ..errors import DomainError, RegimeError

RIGHT, LEFT = "R", "L"
# half-width of the sampling window used when a fan range is unbounded
DEFAULT_WINDOW = 12.0
DEFAULT_HU = 1e-3


def _f1_raw(bd: BoundaryData, t):
    if bd.family == "pmom":
        t = np.asarray(t, float)
        return bd.param * np.sign(t) * np.abs(t) ** (bd.param - 1.0)
    return bd.f1(t)


def _f2_raw(bd: BoundaryData, t):
    """f'' with +inf at the singular point of |t|^p, p < 2 (no exception)."""
    if bd.family == "pmom" and bd.param < 2.0:
        t = np.asarray(t, float)
        with np.errstate(divide="ignore"):
            return bd.param * (bd.param - 1.0) * np.abs(t) ** (bd.param - 2.0)
    return bd.f2(t)


# -- closed forms of the unbounded fans ----------------------------------------
def _pmom_right(p: float, u):
    u = np.asarray(u, float)
    out = np.empty_like(u)
    neg = u <= 0
    # e^{x} Gamma(p, x) = U(1-p, 1-p, x)
    # hyperu returns nan for arguments below ~1e-180; the correction there is O(x^p)
    x = -u[neg]
    out[neg] = -p * hyperu(1.0 - p, 1.0 - p, np.where(x < 1e-100, 0.0, x))
    up = u[~neg]
    # Kummer: e^{-u} 1F1(p; p+1; u) = 1F1(1; p+1; -u)
    out[~neg] = -p * gamma(p) * np.exp(-up) + up**p * hyp1f1(1.0, p + 1.0, -up)
    return out


def infinite_slope(bd: BoundaryData, orientation: str) -> Optional[Callable]:
    """Closed form of the unbounded-fan slope, or None if unavailable.

    Right: ``m(u) = e^{-u} int_{-inf}^u f'(t) e^t dt``;
    left: ``m(u) = e^{u} int_u^{inf} f'(t) e^{-t} dt``.
    """
    fam, a = bd.family, bd.param
    s = 1.0 if orientation == LEFT else -1.0
    if fam in ("exp", "negexp"):
        sign = 1.0 if fam == "exp" else -1.0
        k = sign * a / (1.0 - s * a)
        return lambda u: k * np.exp(a * np.asarray(u, float))
    if fam == "quad":
        return lambda u: 2.0 * np.asarray(u, float) + 2.0 * s
    if fam == "poly5":
        def m(u):
            u = np.asarray(u, float)
            d = [u**4 / 12 - a * u**2 / 2, u**3 / 3 - a * u, u**2 - a, 2 * u, 2.0 + 0 * u]
            return sum((s**k) * d[k] for k in range(5))
        return m
    if fam == "pmom":
        if orientation == RIGHT:
            return lambda u: _pmom_right(a, u)
        return lambda u: -_pmom_right(a, -np.asarray(u, float))
    return None


def quadrature_slope(bd: BoundaryData, orientation: str, u: np.ndarray,
                     initial: Optional[tuple] = None) -> np.ndarray:
    """Slope on a uniform grid by panel-wise Simpson marching.

    Each step multiplies by ``e^{-h}`` and adds the Simpson value of the
    panel integral, which is stable in the marching direction.  Without an
    initial value the unbounded tail is started at zero far enough out that
    the neglected part is below 1e-16 of the running scale (or at the end of
    a table's range).
    """
    u = np.asarray(u, float)
    h = u[1] - u[0]
    sgn = 1.0 if orientation == RIGHT else -1.0  # marching direction
    lo, hi = bd.domain

    def panel(t0):
        # int_{t0}^{t0+sgn h} f'(t) e^{sgn(t - t0 - sgn h)} dt
        t1 = t0 + sgn * h / 2
        t2 = t0 + sgn * h
        g = _f1_raw(bd, np.array([t0, t1, t2]))
        w = np.exp(np.array([-h, -h / 2, 0.0]))
        return h / 6.0 * (g[0] * w[0] + 4 * g[1] * w[1] + g[2] * w[2])

    def march(start, mval, n):
        vals = [mval]
        t = start
        eh = math.exp(-h)
        for _ in range(n):
            mval = mval * eh + panel(t)
            t += sgn * h
            vals.append(mval)
        return np.array(vals)

    if initial is not None:
        us, ms = initial
        out = np.empty_like(u)
        # march from u* forward and backward (backward uses the reversed recursion)
        i0 = int(round((us - u[0]) / h))
        if abs(u[0] + i0 * h - us) > 1e-9 * max(1.0, abs(us)):
            raise DomainError("initial abscissa must lie on the grid")
        fwd_n = len(u) - 1 - i0 if sgn > 0 else i0
        bwd_n = i0 if sgn > 0 else len(u) - 1 - i0
        fw = march(us, ms, fwd_n)
        if sgn > 0:
            out[i0:] = fw
        else:
            out[: i0 + 1] = fw[::-1]
        # unstable direction: invert the recursion m_prev = (m_next - panel) e^{h}
        mval, t = ms, us
        for k in range(bwd_n):
            t_prev = t - sgn * h
            mval = (mval - panel(t_prev)) * math.exp(h)
            t = t_prev
            out[i0 - (k + 1) if sgn > 0 else i0 + k + 1] = mval
        return out

    start = u[0] if sgn > 0 else u[-1]
    scale = float(np.max(np.abs(_f1_raw(bd, u)))) or 1.0
    tail = 0
    while True:
        t = start - sgn * tail
        if sgn > 0 and t <= lo or sgn < 0 and t >= hi:
            t = lo if sgn > 0 else hi
            break
        if abs(float(_f1_raw(bd, t))) * math.exp(-tail) < 1e-16 * scale and tail >= 5:
            break
        tail += 1
    nt = int(round(abs(start - t) / h))
    t0 = start - sgn * nt * h
    # start from the leading terms of the asymptotic series of the ODE rather
    # than from 0; this matters when the tail is cut at the end of a table
    m0 = float(_f1_raw(bd, t0)) - sgn * float(_f2_raw(bd, t0)) + float(bd.f3(t0))
    vals = march(t0, m0 if math.isfinite(m0) else 0.0, nt + len(u) - 1)[nt:]
    return vals if sgn > 0 else vals[::-1]


@dataclass(frozen=True)
class TangentSolution:
    """Slope function of a tangent fan on ``[u1, u2]``.

    ``u``, ``m`` and ``m2`` hold the tabulation on the (window-clipped)
    range.  When ``mfun`` is set it is the closed form used for evaluation;
    otherwise ``m`` is interpolated by a monotone piecewise cubic.
    """

    bd: BoundaryData = field(repr=False)
    orientation: str
    u1: float
    u2: float
    u: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    m2: np.ndarray = field(repr=False)
    initial: Optional[tuple] = None
    mfun: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mfun is None:
            object.__setattr__(self, "_interp", PchipInterpolator(self.u, self.m, extrapolate=True))

    def m_at(self, v):
        v = np.asarray(v, float)
        out = self.mfun(v) if self.mfun is not None else self._interp(v)
        return float(out) if out.ndim == 0 else out

    def m2_at(self, v):
        v = np.asarray(v, float)
        m = np.asarray(self.m_at(v))
        if self.orientation == RIGHT:
            return _f2_raw(self.bd, v) - _f1_raw(self.bd, v) + m
        return m - _f1_raw(self.bd, v) - _f2_raw(self.bd, v)

    def value(self, p, q):
        """Fan formula at first coordinate ``p`` and depth ``q = 1 - |x2|``.

        The same expression serves the strip (``q = 1 - |x2|``) and the
        parabolic strip (``q = 1 - sqrt(y1^2 + 1 - y2)``).
        """
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        v = p + q if self.orientation == RIGHT else p - q
        return self.m_at(v) * (p - v) + self.bd.f(v)

    def foot(self, p, q):
        p = np.asarray(p, float)
        return p + q if self.orientation == RIGHT else p - q

    def with_initial(self, m0: float) -> "TangentSolution":
        """Same fan with a different initial slope (for fault injection)."""
        return solve_m(self.bd, self.orientation, (self.u1, self.u2),
                       (self.initial[0], m0), h_u=float(self.u[1] - self.u[0]), check=False)


def _grid(u1, u2, h, window):
    lo = max(u1, -window) if math.isinf(u1) else u1
    hi = min(u2, window) if math.isinf(u2) else u2
    if math.isinf(u1) and lo >= hi:
        lo = hi - window
    if math.isinf(u2) and hi <= lo:
        hi = lo + window
    n = max(2, int(math.ceil((hi - lo) / h)))
    return np.linspace(lo, hi, n + 1)


def certificate_violation(ts: TangentSolution, tol: Optional[float] = None):
    """First grid abscissa violating the m'' sign rule, or None."""
    m2 = np.asarray(ts.m2_at(ts.u), float)
    scale = max(1.0, float(np.nanmax(np.abs(np.where(np.isfinite(m2), m2, 0.0)))))
    tol = 1e-9 * scale if tol is None else tol
    bad = m2 > tol if ts.orientation == RIGHT else m2 < -tol
    bad |= ~np.isfinite(m2) & ((m2 > 0) if ts.orientation == RIGHT else (m2 < 0))
    idx = np.flatnonzero(bad)
    return None if idx.size == 0 else float(ts.u[idx[0]])


def solve_m(bd: BoundaryData, orientation: str, u_range=(-math.inf, math.inf),
            initial: Optional[tuple] = None, h_u: float = DEFAULT_HU,
            window: float = DEFAULT_WINDOW, method: str = "auto",
            check: bool = True) -> TangentSolution:
    """Solve the fan ODE on ``u_range``.

    Parameters
    ----------
    orientation : {"R", "L"}
    u_range : (u1, u2)
        ``u1 = -inf`` is allowed for right fans and ``u2 = +inf`` for left
        fans; the integral representation then fixes the solution and no
        initial value may be given.
    initial : (u*, m*), optional
        Required when the range is bounded on the integral side.
    method : {"auto", "closed", "quad"}
        ``auto`` uses the closed form when one exists.
    check : bool
        Raise :class:`RegimeError` when the m'' certificate fails.
    """
    if orientation not in (RIGHT, LEFT):
        raise DomainError(f"orientation must be 'R' or 'L', not {orientation!r}")
    u1, u2 = float(u_range[0]), float(u_range[1])
    if not u1 < u2:
        raise DomainError("empty fan range")
    unbounded = math.isinf(u1) if orientation == RIGHT else math.isinf(u2)
    if unbounded and initial is not None:
        raise DomainError("an unbounded fan takes no initial value")
    if not unbounded and initial is None:
        raise DomainError("a bounded fan needs an initial value (u*, m*)")
    lo, hi = bd.domain
    u1c, u2c = max(u1, lo), min(u2, hi)
    u = _grid(u1c, u2c, h_u, window)
    if initial is not None:
        us = float(initial[0])
        # put u* on the grid
        if not (u[0] - 1e-12 <= us <= u[-1] + 1e-12):
            raise DomainError("initial abscissa outside the fan range")
        n_left = int(round((us - u[0]) / h_u))
        n_right = int(round((u[-1] - us) / h_u))
        u = np.concatenate([us - h_u * np.arange(n_left, 0, -1), [us], us + h_u * np.arange(1, n_right + 1)])
        u = u[(u >= u[0]) & (u <= u2c + 1e-12)]
        initial = (us, float(initial[1]))

    base = infinite_slope(bd, orientation) if method != "quad" else None
    if method == "closed" and base is None:
        raise DomainError(f"no closed form for family {bd.family}")
    mfun = None
    if base is not None:
        if initial is None:
            mfun = base
        else:
            us, ms = initial
            c = ms - float(base(us))
            k = -1.0 if orientation == RIGHT else 1.0
            mfun = lambda v, base=base, c=c, us=us, k=k: base(v) + c * np.exp(k * (np.asarray(v, float) - us))
        m = np.asarray(mfun(u), float)
    else:
        m = quadrature_slope(bd, orientation, u, initial)
    tmp = TangentSolution(bd, orientation, u1, u2, u, m, np.zeros_like(m), initial, mfun)
    m2 = np.asarray(tmp.m2_at(u), float)
    ts = TangentSolution(bd, orientation, u1, u2, u, m, m2, initial, mfun)
    if check:
        where = certificate_violation(ts)
        if where is not None:
            raise RegimeError(f"{orientation}-fan concavity certificate fails at u = {where:.6g}", where)
    return ts


def ode_residual(ts: TangentSolution) -> float:
    """Max finite-difference residual of the fan ODE at interior nodes."""
    u, m = ts.u, np.asarray(ts.m_at(ts.u), float)
    dm = (m[2:] - m[:-2]) / (u[2:] - u[:-2])
    f1 = _f1_raw(ts.bd, u[1:-1])
    r = dm + m[1:-1] - f1 if ts.orientation == RIGHT else -dm + m[1:-1] - f1
    return float(np.max(np.abs(r)))

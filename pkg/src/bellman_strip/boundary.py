"""Boundary data ``f`` for the strip problems.

A :class:`BoundaryData` bundles a cost function with its first three
derivatives.  Five analytic families are built in; a sixth, ``table``,
wraps user samples in a monotone piecewise-cubic interpolant.

Family strings follow a small grammar used by the command line::

    exp:<lam>   negexp:<lam>   pmom:<p>   poly5:<c>   quad   table:<path>
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

FAMILY_GRAMMAR = (
    "family spec grammar:\n"
    "  exp:<lam>      f(t) = exp(lam t),      0 < lam < 1\n"
    "  negexp:<lam>   f(t) = -exp(lam t),     0 < lam < 1\n"
    "  pmom:<p>       f(t) = |t|^p,           p >= 1\n"
    "  poly5:<c>      f(t) = t^5/60 - c t^3/6\n"
    "  quad           f(t) = t^2\n"
    "  table:<path>   two-column CSV 't,f' (>= 4 rows, t strictly increasing)"
)

FAMILIES = ("exp", "negexp", "pmom", "poly5", "quad", "table")


@dataclass(frozen=True)
class BoundaryData:
    """Cost function on the boundary lines / fixed parabola.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    param : float
        lambda, p or c depending on the family (unused for quad/table).
    t, y : ndarray, optional
        Samples for the table family.
    source : str
        Spec string this object was parsed from (used in file headers).
    """

    family: str
    param: float = 0.0
    t: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    y: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    source: str = ""

    def __post_init__(self):
        fam, a = self.family, self.param
        if fam not in FAMILIES:
            raise DomainError(f"unknown family {fam!r}")
        if fam in ("exp", "negexp") and not (0.0 < a < 1.0):
            raise DomainError(f"{fam} requires 0 < lambda < 1, got {a}")
        if fam == "pmom" and not a >= 1.0:
            raise DomainError(f"pmom requires p >= 1, got {a}")
        if fam == "table":
            t = np.asarray(self.t, dtype=float)
            y = np.asarray(self.y, dtype=float)
            if t.ndim != 1 or t.shape != y.shape or t.size < 4:
                raise DomainError("table needs at least 4 (t, f) samples")
            if np.any(np.diff(t) <= 0):
                raise DomainError("table abscissae must be strictly increasing")
            object.__setattr__(self, "t", t)
            object.__setattr__(self, "y", y)
            p = PchipInterpolator(t, y, extrapolate=False)
            object.__setattr__(self, "_pchip", (p, p.derivative(1), p.derivative(2), p.derivative(3)))
        if not self.source:
            object.__setattr__(self, "source", self.spec())

    # -- metadata --------------------------------------------------------
    def spec(self) -> str:
        """Canonical family string."""
        if self.family == "quad":
            return "quad"
        if self.family == "table":
            return self.source or "table:<memory>"
        return f"{self.family}:{self.param:g}"

    @property
    def domain(self) -> tuple[float, float]:
        """Closed interval on which ``f`` is defined."""
        if self.family == "table":
            return float(self.t[0]), float(self.t[-1])
        return -math.inf, math.inf

    @property
    def is_even(self) -> bool:
        return self.family in ("pmom", "quad")

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "table":
            lo, hi = self.domain
            if np.any((t < lo) | (t > hi)):
                raise DomainError(f"t outside table range [{lo}, {hi}]")
        return t

    @staticmethod
    def _out(v):
        return float(v) if np.ndim(v) == 0 else v

    # -- values ------------------------------------------------------------
    def f(self, t):
        """Boundary value ``f(t)``."""
        t = self._check(t)
        fam, a = self.family, self.param
        if fam == "exp":
            v = np.exp(a * t)
        elif fam == "negexp":
            v = -np.exp(a * t)
        elif fam == "pmom":
            v = np.abs(t) ** a
        elif fam == "poly5":
            v = t**5 / 60.0 - a * t**3 / 6.0
        elif fam == "quad":
            v = t * t
        else:
            v = self._pchip[0](t)
        return self._out(v)

    def f1(self, t):
        """First derivative; ``pmom:1`` is singular at 0."""
        t = self._check(t)
        fam, a = self.family, self.param
        if fam == "exp":
            v = a * np.exp(a * t)
        elif fam == "negexp":
            v = -a * np.exp(a * t)
        elif fam == "pmom":
            if a == 1.0 and np.any(t == 0):
                raise DomainError("f' of |t| is undefined at t = 0")
            v = a * np.sign(t) * np.abs(t) ** (a - 1.0)
        elif fam == "poly5":
            v = t**4 / 12.0 - a * t**2 / 2.0
        elif fam == "quad":
            v = 2.0 * t
        else:
            v = self._pchip[1](t)
        return self._out(v)

    def f2(self, t):
        """Second derivative; ``pmom`` with p < 2 is singular at 0."""
        t = self._check(t)
        fam, a = self.family, self.param
        if fam == "exp":
            v = a * a * np.exp(a * t)
        elif fam == "negexp":
            v = -a * a * np.exp(a * t)
        elif fam == "pmom":
            if a < 2.0 and np.any(t == 0):
                raise DomainError(f"f'' of |t|^{a:g} is not a function at t = 0")
            if a == 2.0:
                v = np.full_like(t, 2.0)
            else:
                v = a * (a - 1.0) * np.abs(t) ** (a - 2.0)
        elif fam == "poly5":
            v = t**3 / 3.0 - a * t
        elif fam == "quad":
            v = np.full_like(t, 2.0)
        else:
            v = self._pchip[2](t)
        return self._out(v)

    def f3(self, t):
        """Third derivative (sign data for locating cup origins)."""
        t = self._check(t)
        fam, a = self.family, self.param
        if fam == "exp":
            v = a**3 * np.exp(a * t)
        elif fam == "negexp":
            v = -(a**3) * np.exp(a * t)
        elif fam == "pmom":
            if a < 3.0 and a != 2.0 and np.any(t == 0):
                raise DomainError(f"f''' of |t|^{a:g} is singular at t = 0")
            if a == 2.0:
                v = np.zeros_like(t)
            else:
                v = a * (a - 1.0) * (a - 2.0) * np.sign(t) * np.abs(t) ** (a - 3.0)
        elif fam == "poly5":
            v = t * t - a
        elif fam == "quad":
            v = np.zeros_like(t)
        else:
            v = self._pchip[3](t)
        return self._out(v)


# -- constructors -------------------------------------------------------------
def exp_family(lam: float) -> BoundaryData:
    return BoundaryData("exp", float(lam))


def negexp_family(lam: float) -> BoundaryData:
    return BoundaryData("negexp", float(lam))


def pmoment(p: float) -> BoundaryData:
    return BoundaryData("pmom", float(p))


def poly5(c: float) -> BoundaryData:
    return BoundaryData("poly5", float(c))


def quad() -> BoundaryData:
    return BoundaryData("quad")


def table(t, y, source: str = "") -> BoundaryData:
    return BoundaryData("table", t=np.asarray(t, float), y=np.asarray(y, float), source=source)


def read_table_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``t,f`` CSV; a non-numeric header row is skipped."""
    ts, ys = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                ts.append(float(row[0]))
                ys.append(float(row[1]))
            except (ValueError, IndexError):
                if ts:
                    raise DomainError(f"malformed row in {path}: {row}")
    return np.array(ts), np.array(ys)


def parse_family(spec: str) -> BoundaryData:
    """Parse a family string (see ``FAMILY_GRAMMAR``).

    Raises
    ------
    DomainError
        On malformed strings or parameters outside the admissible range.
    """
    s = spec.strip()
    name, _, arg = s.partition(":")
    name = name.lower()
    if name == "quad":
        if arg:
            raise DomainError(f"quad takes no parameter: {spec!r}")
        return quad()
    if name == "table":
        if not arg:
            raise DomainError("table needs a path")
        t, y = read_table_csv(arg)
        return table(t, y, source=s)
    if name not in ("exp", "negexp", "pmom", "poly5"):
        raise DomainError(f"unknown family {spec!r}")
    try:
        val = float(arg)
    except ValueError:
        raise DomainError(f"bad parameter in {spec!r}") from None
    if not math.isfinite(val):
        raise DomainError(f"bad parameter in {spec!r}")
    return BoundaryData(name, val, source=s)


def eval_f(bd: BoundaryData, t):
    return bd.f(t)


def eval_f1(bd: BoundaryData, t):
    return bd.f1(t)


def eval_f2(bd: BoundaryData, t):
    return bd.f2(t)


def min_on(bd: BoundaryData, lo: float, hi: float, step: float = 1e-3) -> float:
    """Minimum of ``f`` on ``[lo, hi]`` by a dense scan with the given step."""
    n = int(math.ceil((hi - lo) / step))
    ts = np.linspace(lo, hi, n + 1)
    return float(np.min(bd.f(ts)))

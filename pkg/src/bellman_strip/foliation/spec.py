"""Assembled foliations and point evaluation of V (strip) and B (parabolic strip).

Both domains are handled in "depth" coordinates.  In the strip a point
``(x1, x2)`` has depth ``q = 1 - |x2|``; in the parabolic strip a point
``(y1, y2)`` has depth ``q = 1 - sqrt(y1^2 + 1 - y2)``.  With these, right
and left tangent feet are ``p + q`` and ``p - q`` in both domains, and the
fan formula is literally shared.

A spec is an ordered list of pieces.  Each piece carries membership rules;
the first piece whose rules all hold owns the point.  Rules are triples
``(coord, op, value)`` with ``coord`` in ``{"vR", "vL", "tri"}``: ``vR`` and
``vL`` compare tangent feet, ``tri`` tests the herringbone triangle (in the
strip) or the region under the outer chord (in the parabolic strip).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from ..boundary import BoundaryData
from ..errors import CoverageError, DomainError
from .chords import Herringbone
from .fans import TangentSolution
from .patches import AffinePatch, BilinearPatch

REGIMES = ("AllRight", "AllLeft", "AngleSquare", "SymmetricChord", "CornerRegime", "CupAngle", "Custom")

Figure = Union[TangentSolution, Herringbone, BilinearPatch]


@dataclass(frozen=True)
class Piece:
    name: str
    fig: Figure
    rules: tuple = ()
    omega: Optional[AffinePatch] = None  # affine counterpart of a bilinear patch

    @property
    def kind(self) -> str:
        if isinstance(self.fig, TangentSolution):
            return "fan"
        if isinstance(self.fig, Herringbone):
            return "herringbone"
        return "patch"


@dataclass(frozen=True)
class Interface:
    """Shared boundary between pieces ``i`` (on the ``-normal`` side) and ``j``.

    ``kind == "spine"`` marks the spine of a herringbone; then ``i == j`` and
    the two sides are the left and right halves of that herringbone.
    """

    i: int
    j: int
    start: tuple
    end: tuple
    normal: tuple
    kind: str = "line"
    label: str = ""


@dataclass(frozen=True)
class FoliationSpec:
    bd: BoundaryData = field(repr=False)
    regime: str
    params: dict
    pieces: tuple
    interfaces: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")

    def __repr__(self):
        par = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params.items())
        return f"FoliationSpec({self.regime}{', ' if par else ''}{par}; {len(self.pieces)} pieces)"

    @property
    def herringbone(self) -> Optional[Herringbone]:
        for pc in self.pieces:
            if isinstance(pc.fig, Herringbone):
                return pc.fig
        return None

    # -- piece lookup ----------------------------------------------------------
    def _rule_mask(self, rule, p, q, omega_y=None):
        coord, op, val = rule
        if coord == "tri":
            hb = self.herringbone
            if omega_y is None:
                m = hb.contains(p, q)
            else:
                m = hb.omega_contains(*omega_y)
            return m if op == "in" else ~m
        x = p + q if coord == "vR" else p - q
        if op == "<":
            return x < val
        if op == "<=":
            return x <= val
        if op == ">":
            return x > val
        if op == ">=":
            return x >= val
        raise DomainError(f"bad rule operator {op!r}")

    def locate(self, p, q, omega_y=None) -> np.ndarray:
        p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
        idx = np.full(p.shape, -1, dtype=int)
        for k, pc in enumerate(self.pieces):
            free = idx < 0
            if not np.any(free):
                break
            m = free.copy()
            for rule in pc.rules:
                m &= self._rule_mask(rule, p, q, omega_y)
            idx[m] = k
        if np.any(idx < 0):
            bad = np.flatnonzero(idx.ravel() < 0)[0]
            raise CoverageError(f"point (p={p.ravel()[bad]:.6g}, q={q.ravel()[bad]:.6g}) not covered by any piece")
        return idx

    def _check_footprint(self, p, q):
        lo, hi = self.bd.domain
        if np.isfinite(lo) or np.isfinite(hi):
            if np.any((p - q < lo - 1e-12) | (p + q > hi + 1e-12)):
                raise CoverageError(f"point outside the data range [{lo}, {hi}]")

    # -- evaluation ------------------------------------------------------------
    def piece_value(self, k: int, p, q, half: Optional[str] = None):
        """Formula of piece ``k`` in the strip (usable slightly outside it)."""
        fig = self.pieces[k].fig
        if isinstance(fig, Herringbone):
            if half == "left":
                return fig.left_value(p, q)
            if half == "right":
                return fig.right_value(p, q)
            return fig.value(p, q)
        return fig.value(p, q)

    def eval_V(self, x1, x2):
        """Evaluate V at points of the strip ``|x2| <= 1``."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        if np.any(np.abs(x2) > 1 + 1e-12):
            raise DomainError("point outside the strip |x2| <= 1")
        q = 1.0 - np.minimum(np.abs(x2), 1.0)
        self._check_footprint(x1, q)
        idx = self.locate(x1, q)
        out = np.empty(x1.shape)
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.piece_value(int(k), x1[m], q[m])
        return float(out) if out.ndim == 0 else out

    def eval_B(self, y1, y2):
        """Evaluate B at points of the parabolic strip."""
        y1, y2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        d = y1 * y1 + 1.0 - y2
        tol = 1e-12 * np.maximum(1.0, y1 * y1)
        if np.any((d < -tol) | (d > 1 + tol)):
            raise DomainError("point outside the parabolic strip y1^2 <= y2 <= y1^2 + 1")
        q = 1.0 - np.sqrt(np.clip(d, 0.0, 1.0))
        self._check_footprint(y1, q)
        idx = self.locate(y1, q, omega_y=(y1, y2))
        out = np.empty(y1.shape)
        for k in np.unique(idx):
            m = idx == k
            pc = self.pieces[int(k)]
            if isinstance(pc.fig, TangentSolution):
                out[m] = pc.fig.value(y1[m], q[m])
            elif isinstance(pc.fig, Herringbone):
                out[m] = pc.fig.omega_value(y1[m], y2[m])
            else:
                if pc.omega is None:
                    raise DomainError(f"piece {pc.name!r} has no parabolic-strip counterpart")
                out[m] = pc.omega.value_y(y1[m], y2[m])
        return float(out) if out.ndim == 0 else out


def eval_V(spec: FoliationSpec, x1, x2):
    return spec.eval_V(x1, x2)


def eval_B(spec: FoliationSpec, y1, y2):
    return spec.eval_B(y1, y2)

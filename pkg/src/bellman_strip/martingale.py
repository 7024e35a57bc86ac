"""Lower bounds for V and U from explicit simple martingale transforms.

A tree of depth ``D`` is stored in heap order (children of node ``k`` are
``2k+1`` and ``2k+2``).  Every internal node ``k`` carries

* ``alpha[k]`` -- transform sign (``+-1`` in V-mode, any value in
  ``[-1, 1]`` in U-mode), so ``dpsi = alpha dphi`` on both edges;
* ``tlo[k], thi[k]`` in ``[0, 1]`` -- the node at ``phi`` splits to
  ``phi - tlo (phi + 1)`` and ``phi + thi (1 - phi)`` with the unique
  martingale weights.  ``tlo = thi = 0`` is a pass-through node.

In V-mode nodes with ``|phi| = 1`` pass through and level ``D - 1`` is
forced to split to ``phi = +-1``, so every leaf satisfies ``|phi| = 1``.
The payoff is the leaf average of ``f(psi)``.

The search seeds the tree with a dynamic program: on the grid
``phi = i/K, psi = x1 + j/K`` it takes upper concave envelopes of the
previous value table along the lines ``psi - a phi = const``, ``a = +-1``.
A greedy random local search on the node parameters follows.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .boundary import BoundaryData
from .errors import DomainError

MODES = ("V", "U")


@numba.njit(cache=True)
def _propagate(k, lk, D, vmode, alpha, tlo, thi, phi, psi, P):
    """Recompute the states of all strict descendants of node ``k`` (level ``lk``)."""
    lo, hi = k, k + 1
    for L in range(lk, D):
        for j in range(lo, hi):
            c1 = 2 * j + 1
            c2 = c1 + 1
            f = phi[j]
            if P[j] == 0.0 or (vmode and (f == 1.0 or f == -1.0)):
                lo_ = f
                hi_ = f
            elif vmode and L == D - 1:
                lo_ = -1.0
                hi_ = 1.0
            else:
                lo_ = -1.0 if tlo[j] == 1.0 else f - tlo[j] * (f + 1.0)
                hi_ = 1.0 if thi[j] == 1.0 else f + thi[j] * (1.0 - f)
            if hi_ - lo_ <= 0.0:
                phi[c1] = f
                phi[c2] = f
                psi[c1] = psi[j]
                psi[c2] = psi[j]
                P[c1] = 0.5 * P[j]
                P[c2] = 0.5 * P[j]
            else:
                q = (hi_ - f) / (hi_ - lo_)
                phi[c1] = lo_
                phi[c2] = hi_
                psi[c1] = psi[j] + alpha[j] * (lo_ - f)
                psi[c2] = psi[j] + alpha[j] * (hi_ - f)
                P[c1] = P[j] * q
                P[c2] = P[j] * (1.0 - q)
        lo, hi = 2 * lo + 1, 2 * hi + 1
    return lo, hi


def _level(k: int) -> int:
    return int(math.floor(math.log2(k + 1)))


@dataclass
class MartingaleTree:
    """Binary martingale transform started at ``x = (x1, x2)``; ``psi_0 = x1``, ``phi_0 = x2``."""

    x1: float
    x2: float
    depth: int
    mode: str = "V"
    alpha: np.ndarray = field(default=None, repr=False)
    tlo: np.ndarray = field(default=None, repr=False)
    thi: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be 'V' or 'U', not {self.mode!r}")
        if abs(self.x2) > 1:
            raise DomainError("start point must satisfy |x2| <= 1")
        if self.depth < 0:
            raise DomainError("depth must be non-negative")
        n = 2 ** (self.depth + 1) - 1
        self.alpha = np.ones(n) if self.alpha is None else np.asarray(self.alpha, float).copy()
        self.tlo = np.zeros(n) if self.tlo is None else np.asarray(self.tlo, float).copy()
        self.thi = np.zeros(n) if self.thi is None else np.asarray(self.thi, float).copy()
        if self.mode == "V" and np.any(np.abs(self.alpha) != 1):
            raise DomainError("V-mode transforms need alpha = +-1")
        if np.any(np.abs(self.alpha) > 1) or np.any((self.tlo < 0) | (self.tlo > 1) | (self.thi < 0) | (self.thi > 1)):
            raise DomainError("tree parameters out of range")
        self.refresh()

    def refresh(self):
        n = self.alpha.size
        self.phi = np.zeros(n)
        self.psi = np.zeros(n)
        self.P = np.zeros(n)
        self.phi[0], self.psi[0], self.P[0] = self.x2, self.x1, 1.0
        if self.mode == "V" and self.depth == 0 and abs(self.x2) != 1:
            raise DomainError("a V-mode tree of depth 0 needs |x2| = 1")
        _propagate(0, 0, self.depth, self.mode == "V", self.alpha, self.tlo, self.thi, self.phi, self.psi, self.P)

    @property
    def leaves(self) -> slice:
        return slice(2 ** self.depth - 1, 2 ** (self.depth + 1) - 1)

    def leaf_states(self):
        s = self.leaves
        return self.phi[s], self.psi[s], self.P[s]

    def martingale_residual(self) -> float:
        """Max violation of the martingale property over internal nodes (phi and psi)."""
        k = np.arange(2 ** self.depth - 1)
        if k.size == 0:
            return 0.0
        c1, c2 = 2 * k + 1, 2 * k + 2
        P = self.P[k]
        ok = P > 0
        r1 = self.P[c1] * self.phi[c1] + self.P[c2] * self.phi[c2] - P * self.phi[k]
        r2 = self.P[c1] * self.psi[c1] + self.P[c2] * self.psi[c2] - P * self.psi[k]
        return float(np.max(np.abs(np.concatenate([r1[ok] / P[ok], r2[ok] / P[ok]]))))

    def to_dict(self) -> dict:
        def node(k, level):
            d = {"p": float(self.P[k]), "phi": float(self.phi[k]), "psi": float(self.psi[k])}
            if level < self.depth:
                c1, c2 = 2 * k + 1, 2 * k + 2
                if not (self.phi[c1] == self.phi[c2] == self.phi[k]):
                    d["alpha"] = float(self.alpha[k])
                d["children"] = [node(c1, level + 1), node(c2, level + 1)]
            return d
        return {"format": "mtree/1", "mode": self.mode, "depth": self.depth,
                "x": [self.x1, self.x2], "root": node(0, 0)}

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def payoff(tree: MartingaleTree, bd: BoundaryData) -> float:
    """``E f(psi_infinity)``."""
    _, psi, P = tree.leaf_states()
    return float(np.dot(P, bd.f(psi)))


def check_variance_identity(tree: MartingaleTree) -> float:
    """``|E psi^2 - (x1^2 + 1 - x2^2)|`` (meaningful for V-mode trees)."""
    _, psi, P = tree.leaf_states()
    return abs(float(np.dot(P, psi * psi)) - (tree.x1 ** 2 + 1.0 - tree.x2 ** 2))


# -- dynamic-programming seed ---------------------------------------------------------
def _hull_line(vals: np.ndarray):
    """Upper concave envelope of ``(i, vals[i])`` (``-inf`` = unavailable) and its vertices."""
    idx = np.flatnonzero(np.isfinite(vals))
    out = np.full(vals.shape, -np.inf)
    if idx.size == 0:
        return out, idx
    hull = []
    for i in idx:
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            if (vals[i2] - vals[i1]) * (i - i1) <= (vals[i] - vals[i1]) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append(i)
    h = np.array(hull)
    out[h[0]:h[-1] + 1] = np.interp(np.arange(h[0], h[-1] + 1), h, vals[h])
    return out, h


class _DP:
    """Value tables ``G_d`` on the ``(phi, psi)`` grid for ``d = 0..D``."""

    def __init__(self, bd, x1, D, K, L, mode):
        self.K, self.L, self.D, self.x1 = K, L, D, x1
        phis = np.arange(-K, K + 1)
        psis = np.arange(-L * K, L * K + 1)
        fv = np.asarray(bd.f(x1 + psis / K), float)
        G = np.full((phis.size, psis.size), -np.inf)
        if mode == "V":
            G[0] = fv
            G[-1] = fv
        else:
            G[:] = fv
        self.tables = [G]
        self.cache = {}
        for d in range(1, D + 1):
            new = G.copy()
            for a in (1, -1):
                for c in range(-L * K - K, L * K + K + 1):
                    i, j = self._line(a, c)
                    if i.size < 2:
                        continue
                    env, _ = _hull_line(G[i, j])
                    new[i, j] = np.maximum(new[i, j], env)
            G = new
            self.tables.append(G)

    def _line(self, a, c):
        K, L = self.K, self.L
        i = np.arange(2 * K + 1)
        j = c + a * (i - K) + L * K
        ok = (j >= 0) & (j <= 2 * L * K)
        return i[ok], j[ok]

    def hull(self, d, a, c):
        key = (d, a, c)
        if key not in self.cache:
            i, j = self._line(a, c)
            env, h = _hull_line(self.tables[d][i, j])
            self.cache[key] = (i, j, env, h)
        return self.cache[key]

    def best_move(self, d, i, j):
        """Best split of grid node ``(i, j)`` using table ``G_{d-1}``."""
        K, L = self.K, self.L
        best = (self.tables[d - 1][i, j], None)
        for a in (1, -1):
            c = (j - L * K) - a * (i - K)
            li, lj, env, h = self.hull(d - 1, a, c)
            pos = np.flatnonzero(li == i)
            if pos.size == 0 or h.size == 0:
                continue
            p = int(pos[0])
            val = env[p]
            margin = 1e-14 * max(1.0, abs(best[0])) if np.isfinite(best[0]) else 0.0
            if val > best[0] + margin:
                hv = li[h]
                k = np.searchsorted(hv, i)
                if k == 0 or k >= hv.size or hv[k] == i:
                    continue
                best = (val, (a, int(hv[k - 1]), int(hv[k])))
        return best


def dp_seed(bd: BoundaryData, x1: float, x2: float, depth: int, mode: str = "V",
            K: int = 40, L: int = 12) -> MartingaleTree:
    """Tree realising the grid dynamic program (requires ``x2 K`` integral)."""
    i0 = x2 * K
    if abs(i0 - round(i0)) > 1e-9:
        raise DomainError("x2 must be a multiple of 1/K for the grid seed")
    dp = _DP(bd, x1, depth, K, L, mode)
    n = 2 ** (depth + 1) - 1
    alpha, tlo, thi = np.ones(n), np.zeros(n), np.zeros(n)
    grid = {0: (int(round(i0)) + K, L * K)}
    for k in range(2 ** depth - 1):
        if k not in grid:
            continue
        i, j = grid[k]
        level = _level(k)
        phi = (i - K) / K
        c1, c2 = 2 * k + 1, 2 * k + 2
        move = None
        if not (mode == "V" and abs(i - K) == K):
            _, move = dp.best_move(depth - level, i, j)
        if move is None:
            grid[c1] = grid[c2] = (i, j)
            continue
        a, ilo, ihi = move
        alpha[k] = a
        tlo[k] = (i - ilo) / (i - 0) if ilo == 0 else (phi - (ilo - K) / K) / (phi + 1)
        thi[k] = (ihi - i) / (2 * K - i) if ihi == 2 * K else ((ihi - K) / K - phi) / (1 - phi)
        grid[c1] = (ilo, j + a * (ilo - i))
        grid[c2] = (ihi, j + a * (ihi - i))
    return MartingaleTree(x1, x2, depth, mode, alpha, np.clip(tlo, 0, 1), np.clip(thi, 0, 1))


# -- local search -----------------------------------------------------------------------
def _default_tree(x1, x2, depth, mode):
    return MartingaleTree(x1, x2, depth, mode)


def search_lower_bound(bd: BoundaryData, x, depth: int = 12, trials: int = 100_000, mode: str = "V",
                       seed: int = 0, K: int = 40, L: int = 12):
    """Best payoff found over martingale transforms started at ``x``.

    Returns ``(best_payoff, best_tree)``.  Deterministic for a given seed.
    Every returned tree satisfies the martingale and transform constraints
    by construction, so the payoff is a certified lower bound for V (V-mode)
    or U (U-mode).
    """
    x1, x2 = float(x[0]), float(x[1])
    if abs(x2) > 1:
        raise DomainError("start point must satisfy |x2| <= 1")
    if mode not in MODES:
        raise DomainError(f"mode must be 'V' or 'U', not {mode!r}")
    if mode == "V" and abs(x2) == 1:
        t = MartingaleTree(x1, x2, depth, mode)
        return payoff(t, bd), t
    if depth == 0:
        t = MartingaleTree(x1, x2, 0, "U")
        return payoff(t, bd), t
    try:
        tree = dp_seed(bd, x1, x2, depth, mode, K, L)
    except DomainError:
        tree = _default_tree(x1, x2, depth, mode)
    best = payoff(tree, bd)
    if trials <= 0:
        return best, tree

    rng = np.random.default_rng(seed)
    vmode = mode == "V"
    n_int = 2 ** depth - 1
    # scratch copies for proposals
    phi, psi, P = tree.phi.copy(), tree.psi.copy(), tree.P.copy()
    alpha, tlo, thi = tree.alpha, tree.tlo, tree.thi
    reachable = np.flatnonzero(tree.P[:n_int] > 0)
    if reachable.size == 0:
        return best, tree
    scales = np.array([0.3, 0.05, 0.005, 0.0005])
    for _ in range(trials):
        k = int(reachable[rng.integers(reachable.size)])
        kind = rng.integers(3)
        sc = scales[rng.integers(scales.size)]
        step = rng.standard_normal()
        old = (alpha[k], tlo[k], thi[k])
        if kind == 0:
            if vmode:
                alpha[k] = -alpha[k]
            else:
                alpha[k] = min(1.0, max(-1.0, alpha[k] + sc * step))
        elif kind == 1:
            tlo[k] = min(1.0, max(0.0, tlo[k] + sc * step))
        else:
            thi[k] = min(1.0, max(0.0, thi[k] + sc * step))
        lk = _level(k)
        lo, hi = _propagate(k, lk, depth, vmode, alpha, tlo, thi, phi, psi, P)
        old_c = float(np.dot(tree.P[lo:hi], bd.f(tree.psi[lo:hi])))
        new_c = float(np.dot(P[lo:hi], bd.f(psi[lo:hi])))
        if new_c > old_c + 1e-15 * max(1.0, abs(old_c)):
            best += new_c - old_c
            _copy_subtree(k, depth, lk, phi, psi, P, tree.phi, tree.psi, tree.P)
            reachable = np.flatnonzero(tree.P[:n_int] > 0)
        else:
            alpha[k], tlo[k], thi[k] = old
            _copy_subtree(k, depth, lk, tree.phi, tree.psi, tree.P, phi, psi, P)
    tree.refresh()
    return payoff(tree, bd), tree


@numba.njit(cache=True)
def _copy_subtree(k, D, lk, sphi, spsi, sP, dphi, dpsi, dP):
    lo, hi = k, k + 1
    for L in range(lk, D + 1):
        for j in range(lo, hi):
            dphi[j] = sphi[j]
            dpsi[j] = spsi[j]
            dP[j] = sP[j]
        lo, hi = 2 * lo + 1, 2 * hi + 1

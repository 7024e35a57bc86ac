"""Discrete minimal diagonally concave function on a truncated lattice.

The lattice has nodes ``(m/N, n/N)`` with ``|n| <= N`` and ``|m| <= MN``.
Rows ``n = +-N`` carry the boundary values ``f(m/N)``; the interior starts
at ``min f`` over ``[-M, M]`` and is raised by

    G(m, n) <- max(G(m, n), avg over the diagonal pair, avg over the anti-diagonal pair)

until the sup-norm increment drops to ``tol``.  The result is the least
diagonally concave grid function above the initial one, i.e. a discrete
lower approximation of V.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np

from .boundary import BoundaryData, min_on
from .errors import ConvergenceError, DomainError

DEFAULT_N = 30
DEFAULT_M = 10
DEFAULT_TOL = 1e-5
DEFAULT_THRESH = 0.005
MAX_ITER = 10_000_000

# the bundled TBB may be too old for numba; fall back to the portable layer
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

UNCLASSIFIED, BILINEAR, DIAG_AFFINE, ANTIDIAG_AFFINE = 0, 1, 2, 3
CLASS_NAMES = {UNCLASSIFIED: "Unclassified", BILINEAR: "Bilinear", DIAG_AFFINE: "DiagAffine",
               ANTIDIAG_AFFINE: "AntiDiagAffine"}
COLORS = {
    UNCLASSIFIED: (255, 255, 255),
    BILINEAR: (0, 200, 0),
    DIAG_AFFINE: (220, 0, 0),
    ANTIDIAG_AFFINE: (0, 0, 220),
}


# -- kernels ----------------------------------------------------------------------
@numba.njit(cache=True, parallel=True)
def _jacobi(G, out):
    """One simultaneous update; edge columns and boundary rows are copied."""
    R, C = G.shape
    rowmax = np.zeros(R)
    for i in numba.prange(1, R - 1):
        out[i, 0] = G[i, 0]
        out[i, C - 1] = G[i, C - 1]
        d = 0.0
        for j in range(1, C - 1):
            g = G[i, j]
            a = 0.5 * (G[i + 1, j + 1] + G[i - 1, j - 1])
            b = 0.5 * (G[i - 1, j + 1] + G[i + 1, j - 1])
            v = g
            if a > v:
                v = a
            if b > v:
                v = b
            out[i, j] = v
            if v - g > d:
                d = v - g
        rowmax[i] = d
    return rowmax.max()


@numba.njit(cache=True)
def _gauss_seidel(G):
    """In-place sweep in row-major order."""
    R, C = G.shape
    d = 0.0
    for i in range(1, R - 1):
        for j in range(1, C - 1):
            g = G[i, j]
            a = 0.5 * (G[i + 1, j + 1] + G[i - 1, j - 1])
            b = 0.5 * (G[i - 1, j + 1] + G[i + 1, j - 1])
            v = g
            if a > v:
                v = a
            if b > v:
                v = b
            G[i, j] = v
            if v - g > d:
                d = v - g
    return d


def set_threads(n: int | None = None) -> int:
    """Set the kernel thread count (argument, else ``BELLMAN_THREADS``, else numba's default)."""
    if n is None:
        env = os.environ.get("BELLMAN_THREADS")
        n = int(env) if env else None
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


# -- grid ---------------------------------------------------------------------------
@dataclass
class LatticeGrid:
    """Values on the lattice, ``values[n + N, m + M N]``."""

    N: int
    M: int
    values: np.ndarray = field(repr=False)
    iterations: int = 0
    sup_delta_history: list = field(default_factory=list, repr=False)
    family: str = ""
    tol: float = float("nan")

    @property
    def x1(self) -> np.ndarray:
        return np.arange(-self.M * self.N, self.M * self.N + 1) / self.N

    @property
    def x2(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1) / self.N

    def value(self, m: int, n: int) -> float:
        return float(self.values[n + self.N, m + self.M * self.N])

    def copy(self) -> "LatticeGrid":
        return LatticeGrid(self.N, self.M, self.values.copy(), self.iterations,
                           list(self.sup_delta_history), self.family, self.tol)


def init_lattice(bd: BoundaryData, N: int = DEFAULT_N, M: int = DEFAULT_M) -> LatticeGrid:
    """Starting grid ``G_0``: boundary rows ``f(m/N)``, interior ``min_{[-M, M]} f``."""
    if N < 1 or M < 1:
        raise DomainError("N and M must be positive")
    lo, hi = bd.domain
    if lo > -M or hi < M:
        raise DomainError(f"boundary data must cover [-{M}, {M}]")
    x1 = np.arange(-M * N, M * N + 1) / N
    G = np.full((2 * N + 1, x1.size), min_on(bd, -M, M, 1e-3))
    G[0] = bd.f(x1)
    G[-1] = G[0]
    return LatticeGrid(N, M, G, family=bd.spec())


def iterate_step(g: LatticeGrid) -> tuple[LatticeGrid, float]:
    """One Jacobi update; returns the new grid and the sup-norm increment."""
    out = np.empty_like(g.values)
    out[0] = g.values[0]
    out[-1] = g.values[-1]
    d = float(_jacobi(g.values, out)) if g.values.shape[0] > 2 else 0.0
    return LatticeGrid(g.N, g.M, out, g.iterations + 1, g.sup_delta_history + [d], g.family, g.tol), d


def solve_lattice(bd: BoundaryData, N: int = DEFAULT_N, M: int = DEFAULT_M, tol: float = DEFAULT_TOL,
                  max_iter: int = MAX_ITER, gauss_seidel: bool = False, threads: int | None = None) -> LatticeGrid:
    """Iterate from ``G_0`` until the sup-norm increment is at most ``tol``.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` updates do not meet the stopping rule.
    """
    set_threads(threads)
    g = init_lattice(bd, N, M)
    G = g.values
    H = G.copy()
    hist = []
    d = math.inf
    k = 0
    if G.shape[0] > 2:
        while k < max_iter:
            if gauss_seidel:
                d = float(_gauss_seidel(G))
            else:
                d = float(_jacobi(G, H))
                G, H = H, G
            k += 1
            hist.append(d)
            if d <= tol:
                break
        else:
            raise ConvergenceError(f"no convergence in {max_iter} iterations (sup delta {d:.3g})", d)
    return LatticeGrid(N, M, G, k, hist, bd.spec(), tol)


# -- flatness ----------------------------------------------------------------------------
@dataclass
class FlatnessMap:
    """Per-cell second differences and classes (``UNCLASSIFIED`` on edge cells)."""

    N: int
    M: int
    D1: np.ndarray = field(repr=False)
    D2: np.ndarray = field(repr=False)
    cls: np.ndarray = field(repr=False)
    thresh: float = DEFAULT_THRESH

    def counts(self) -> dict:
        return {CLASS_NAMES[k]: int(np.sum(self.cls == k)) for k in CLASS_NAMES}


def classify_flatness(g: LatticeGrid, thresh: float = DEFAULT_THRESH) -> FlatnessMap:
    """Classify cells by the two diagonal second differences.

    Both below ``thresh``: bilinear (green).  Only the diagonal one: affine
    along the diagonal (red).  Only the anti-diagonal one: blue.
    """
    G = g.values
    D1 = np.full(G.shape, np.nan)
    D2 = np.full(G.shape, np.nan)
    c = G[1:-1, 1:-1]
    D1[1:-1, 1:-1] = np.abs(c - 0.5 * (G[2:, 2:] + G[:-2, :-2]))
    D2[1:-1, 1:-1] = np.abs(c - 0.5 * (G[:-2, 2:] + G[2:, :-2]))
    cls = np.full(G.shape, UNCLASSIFIED, dtype=np.int8)
    inner = np.zeros(G.shape, bool)
    inner[1:-1, 1:-1] = True
    s1 = inner & (D1 < thresh)
    s2 = inner & (D2 < thresh)
    cls[s1 & s2] = BILINEAR
    cls[s1 & ~s2] = DIAG_AFFINE
    cls[~s1 & s2] = ANTIDIAG_AFFINE
    return FlatnessMap(g.N, g.M, D1, D2, cls, thresh)


# -- export ------------------------------------------------------------------------------
def _header(g: LatticeGrid) -> str:
    return (f"# N={g.N}\n# M={g.M}\n# tol={g.tol!r}\n# iterations={g.iterations}\n"
            f"# family={g.family}\n")


def export_grid_csv(g: LatticeGrid, path: str) -> None:
    """Write ``m,n,value`` rows (full precision) after ``#`` metadata lines."""
    N, MN = g.N, g.M * g.N
    with open(path, "w") as fh:
        fh.write(_header(g))
        fh.write("m,n,value\n")
        for i, n in enumerate(range(-N, N + 1)):
            row = g.values[i].tolist()
            fh.write("".join(f"{m},{n},{row[m + MN]!r}\n" for m in range(-MN, MN + 1)))


def read_grid_csv(path: str) -> LatticeGrid:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line.startswith("m,"):
                continue
            elif line.strip():
                m, n, v = line.split(",")
                rows.append((int(m), int(n), float(v)))
    N, M = int(meta["N"]), int(meta["M"])
    vals = np.full((2 * N + 1, 2 * M * N + 1), np.nan)
    for m, n, v in rows:
        vals[n + N, m + M * N] = v
    return LatticeGrid(N, M, vals, int(meta.get("iterations", 0)), [], meta.get("family", ""),
                       float(meta.get("tol", "nan")))


def export_map_ppm(fm: FlatnessMap, path: str) -> None:
    """Binary P6 image, one pixel per cell, row ``n = +N`` first."""
    H, W = fm.cls.shape
    pal = np.zeros((4, 3), np.uint8)
    for k, rgb in COLORS.items():
        pal[k] = rgb
    img = pal[fm.cls[::-1]]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{W} {H}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    W, H = map(int, parts[1].split())
    return np.frombuffer(parts[3], np.uint8).reshape(H, W, 3)

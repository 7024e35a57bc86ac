"""Cross-checks between the foliation, lattice and martingale routes.

Each check returns a :class:`VerificationReport`.  ``run_suite`` runs a
battery and ``write_report`` renders the ``report/1`` text format.  Report
files never contain timings, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import BoundaryData, parse_family
from .errors import BellmanError
from .foliation import FoliationSpec, build_foliation_auto, check_c1_gluing
from .lattice import DEFAULT_M, DEFAULT_N, DEFAULT_TOL, solve_lattice
from .martingale import check_variance_identity, search_lower_bound

REPORT_FORMAT = "report/1"


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0.1.0"


@dataclass
class VerificationReport:
    name: str
    params: dict
    residual: float
    locus: str
    tol: float
    passed: bool
    runtime: float = field(default=0.0, compare=False)
    note: str = ""

    def block(self) -> str:
        lines = [f"[check {self.name}]"]
        for k in sorted(self.params):
            lines.append(f"{k} = {self.params[k]}")
        lines += [f"residual = {self.residual:.6e}", f"locus = {self.locus}", f"tol = {self.tol:.3e}",
                  f"status = {'PASS' if self.passed else 'FAIL'}"]
        if self.note:
            lines.append(f"note = {self.note}")
        return "\n".join(lines) + "\n"


def _as_bd(bd) -> BoundaryData:
    return parse_family(bd) if isinstance(bd, str) else bd


def _timed(fn):
    def wrap(*args, **kw):
        t = time.perf_counter()
        rep = fn(*args, **kw)
        rep.runtime = time.perf_counter() - t
        return rep
    wrap.__name__ = fn.__name__
    wrap.__doc__ = fn.__doc__
    return wrap


@_timed
def check_diagonal(bd, x1_range=(-3.0, 3.0), step: float = 1e-2, spec: Optional[FoliationSpec] = None,
                   tol: float = 1e-8) -> VerificationReport:
    """``max |V(x1, 0) - B(x1, x1^2 + 1)|`` over a uniform sample of ``x1``."""
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    n = int(round((x1_range[1] - x1_range[0]) / step)) + 1
    x = np.linspace(x1_range[0], x1_range[1], n)
    r = np.abs(spec.eval_V(x, 0.0 * x) - spec.eval_B(x, x * x + 1.0))
    k = int(np.argmax(r))
    return VerificationReport(f"diagonal[{bd.spec()}]", {"family": bd.spec(), "regime": spec.regime,
                              "x1_range": list(x1_range), "step": step},
                              float(r[k]), f"x1={x[k]:.6g}", tol, bool(r[k] <= tol))


@_timed
def check_gluing(bd, spec: Optional[FoliationSpec] = None) -> VerificationReport:
    """C^1 gluing at every interface of the automatic foliation."""
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    g = check_c1_gluing(spec)
    locus = "none"
    if g.per_interface:
        lab, vj, sj = max(g.per_interface, key=lambda t: max(t[1], t[2]))
        locus = lab
    return VerificationReport(f"gluing[{bd.spec()}]", {"family": bd.spec(), "regime": spec.regime,
                              "interfaces": len(spec.interfaces)}, g.max_jump, locus, g.tol, g.passed)


@_timed
def check_boundary(bd, spec: Optional[FoliationSpec] = None, n: int = 1000, x1_range=(-5.0, 5.0),
                   tol: float = 1e-10) -> VerificationReport:
    """``max |V(x1, +-1) - f(x1)|``."""
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    x = np.linspace(x1_range[0], x1_range[1], n)
    r = np.maximum(np.abs(spec.eval_V(x, 1.0 + 0 * x) - bd.f(x)), np.abs(spec.eval_V(x, -1.0 + 0 * x) - bd.f(x)))
    k = int(np.argmax(r))
    return VerificationReport(f"boundary[{bd.spec()}]", {"family": bd.spec(), "n": n},
                              float(r[k]), f"x1={x[k]:.6g}", tol, bool(r[k] <= tol))


@_timed
def check_concavity(bd, spec: Optional[FoliationSpec] = None, n: int = 10_000, h: float = 1e-3,
                    seed: int = 0, x1_range=(-5.0, 5.0), tol: float = 1e-8) -> VerificationReport:
    """Largest diagonal second difference of V at random interior points."""
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(*x1_range, n)
    x2 = rng.uniform(-1 + 2 * h, 1 - 2 * h, n)
    worst, locus = -math.inf, ""
    for e in ((1.0, 1.0), (1.0, -1.0)):
        e1, e2 = e[0] / math.sqrt(2), e[1] / math.sqrt(2)
        d = spec.eval_V(x1 + h * e1, x2 + h * e2) - 2 * spec.eval_V(x1, x2) + spec.eval_V(x1 - h * e1, x2 - h * e2)
        k = int(np.argmax(d))
        if d[k] > worst:
            worst, locus = float(d[k]), f"x=({x1[k]:.6g},{x2[k]:.6g}) e={e}"
    return VerificationReport(f"concavity[{bd.spec()}]", {"family": bd.spec(), "n": n, "h": h, "seed": seed},
                              worst, locus, tol, bool(worst <= tol))


@_timed
def check_discrete_vs_closed(bd, N: int = DEFAULT_N, M: int = DEFAULT_M, window: Optional[float] = None,
                             tol: float = DEFAULT_TOL, err_tol: float = 2e-2,
                             spec: Optional[FoliationSpec] = None, grid=None) -> VerificationReport:
    """Lattice against the foliation on ``|x1| <= window`` (default ``M/2``).

    Passes when the grid stays below V + 1e-9 and the two-sided error is at
    most ``err_tol``.  The residual reported is the two-sided error.
    """
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    window = M / 2 if window is None else window
    g = grid if grid is not None else solve_lattice(bd, N, M, tol)
    X1, X2 = np.meshgrid(g.x1, g.x2)
    w = np.abs(X1) <= window + 1e-12
    V = spec.eval_V(X1[w], X2[w])
    diff = g.values[w] - V
    dom = float(np.max(diff))
    err = float(np.max(np.abs(diff)))
    k = int(np.argmax(np.abs(diff)))
    ok = dom <= 1e-9 and err <= err_tol
    return VerificationReport(f"discrete[{bd.spec()},N={N},M={M}]",
                              {"family": bd.spec(), "N": N, "M": M, "tol": tol, "window": window,
                               "iterations": g.iterations, "domination": f"{dom:.6e}"},
                              err, f"x=({X1[w][k]:.6g},{X2[w][k]:.6g})", err_tol, ok)


def _u_bound(spec: FoliationSpec, x1: float, x2: float, n: int = 401) -> float:
    d = np.linspace(0.0, 1.0 - x2 * x2, n)
    return float(np.max(spec.eval_B(np.full(n, x1), x1 * x1 + d)))


@_timed
def check_subordination(bd, samples=4, depth: int = 8, trials: int = 2000, seed: int = 0, K: int = 20,
                        spec: Optional[FoliationSpec] = None, tol: float = 1e-8) -> VerificationReport:
    """U-mode search payoffs against ``sup_delta B(x1, x1^2 + delta)``.

    ``samples`` is a list of points or a count of seeded random points
    (``x2`` on the ``1/K`` grid so the grid seed applies).
    """
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    if isinstance(samples, int):
        rng = np.random.default_rng(seed)
        pts = [(float(rng.uniform(-1, 1)), int(rng.integers(-K + 1, K)) / K) for _ in range(samples)]
    else:
        pts = [tuple(map(float, p)) for p in samples]
    worst, locus, gaps = -math.inf, "", []
    for i, (x1, x2) in enumerate(pts):
        pay, _ = search_lower_bound(bd, (x1, x2), depth, trials, "U", seed + i, K=K)
        ub = _u_bound(spec, x1, x2)
        gaps.append(ub - pay)
        if pay - ub > worst:
            worst, locus = pay - ub, f"x=({x1:.6g},{x2:.6g})"
    return VerificationReport(f"subordination[{bd.spec()}]",
                              {"family": bd.spec(), "samples": len(pts), "depth": depth, "trials": trials,
                               "seed": seed, "min_gap": f"{min(gaps):.6e}"},
                              worst, locus, tol, bool(worst <= tol))


@_timed
def check_martingale(bd, x=(0.0, 0.0), depth: int = 12, trials: int = 100_000, seed: int = 0,
                     spec: Optional[FoliationSpec] = None, band: Optional[float] = None) -> VerificationReport:
    """V-mode search payoff against V(x).

    Passes when ``payoff <= V(x) + 1e-8``, the variance identity holds to
    1e-12 and, if ``band`` is given, ``payoff >= V(x) - band``.  The
    residual is ``payoff - V(x)``.
    """
    bd = _as_bd(bd)
    spec = spec or build_foliation_auto(bd)
    pay, tree = search_lower_bound(bd, x, depth, trials, "V", seed)
    V = float(spec.eval_V(*x))
    var = check_variance_identity(tree)
    ok = pay <= V + 1e-8 and var <= 1e-12 and (band is None or pay >= V - band)
    params = {"family": bd.spec(), "x": list(x), "depth": depth, "trials": trials, "seed": seed,
              "payoff": f"{pay:.10f}", "V": f"{V:.10f}", "variance_identity": f"{var:.3e}"}
    if band is not None:
        params["band"] = band
    return VerificationReport(f"martingale[{bd.spec()}]", params, pay - V,
                              f"x=({x[0]:.6g},{x[1]:.6g})", 1e-8, ok)


# -- suites --------------------------------------------------------------------------------
DEFAULT_CONFIG = {
    "families": ["exp:0.5", "negexp:0.5", "quad", "pmom:3", "pmom:1.5", "poly5:1.1"],
    "N": DEFAULT_N,
    "M": DEFAULT_M,
    "tol": DEFAULT_TOL,
    "seed": 0,
    "depth": 12,
    "trials": 20_000,
    "battery": "standard",
}

BATTERIES = {
    "quick": ("diagonal", "boundary", "gluing"),
    "standard": ("diagonal", "boundary", "gluing", "concavity", "martingale", "subordination"),
    "full": ("diagonal", "boundary", "gluing", "concavity", "martingale", "subordination", "discrete"),
}


def run_suite(config: Optional[dict] = None) -> list[VerificationReport]:
    """Run the named battery on every family; reports are sorted by check name."""
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config or {})
    checks = BATTERIES.get(cfg["battery"])
    if checks is None:
        raise ValueError(f"unknown battery {cfg['battery']!r}; choose from {sorted(BATTERIES)}")
    fams = cfg["families"]
    if isinstance(fams, str):
        fams = [s for s in fams.split(",") if s]
    out = []
    for fam in fams:
        bd = parse_family(fam)
        try:
            spec = build_foliation_auto(bd)
        except BellmanError as e:
            out.append(VerificationReport(f"foliation[{bd.spec()}]", {"family": bd.spec()}, math.inf,
                                          "build", 0.0, False, note=str(e).splitlines()[0]))
            continue
        seed = int(cfg["seed"])
        for c in checks:
            if c == "diagonal":
                out.append(check_diagonal(bd, spec=spec))
            elif c == "boundary":
                out.append(check_boundary(bd, spec=spec))
            elif c == "gluing":
                out.append(check_gluing(bd, spec=spec))
            elif c == "concavity":
                out.append(check_concavity(bd, spec=spec, seed=seed))
            elif c == "martingale":
                out.append(check_martingale(bd, depth=int(cfg["depth"]), trials=int(cfg["trials"]),
                                            seed=seed, spec=spec))
            elif c == "subordination":
                out.append(check_subordination(bd, seed=seed, spec=spec))
            elif c == "discrete":
                out.append(check_discrete_vs_closed(bd, int(cfg["N"]), int(cfg["M"]), tol=float(cfg["tol"]),
                                                    spec=spec))
    return sorted(out, key=lambda r: r.name)


def format_report(reports: list[VerificationReport], config: Optional[dict] = None) -> str:
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config or {})
    head = [REPORT_FORMAT, f"artifact {_version()}", f"seed {cfg['seed']}"]
    for k in sorted(cfg):
        if k != "seed":
            v = cfg[k]
            head.append(f"config {k} = {','.join(v) if isinstance(v, list) else v}")
    npass = sum(r.passed for r in reports)
    head.append(f"summary {npass}/{len(reports)} passed")
    return "\n".join(head) + "\n\n" + "\n".join(r.block() for r in reports)


def write_report(reports: list[VerificationReport], path: str, config: Optional[dict] = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_report(reports, config))

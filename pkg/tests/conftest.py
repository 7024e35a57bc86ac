import functools

import numpy as np
import pytest

from bellman_strip import parse_family
from bellman_strip.foliation import build_foliation_auto
from bellman_strip.lattice import solve_lattice


@functools.lru_cache(maxsize=None)
def spec_for(family: str):
    """Automatic foliation, built once per session."""
    return build_foliation_auto(parse_family(family))


@functools.lru_cache(maxsize=None)
def grid_for(family: str, N: int = 30, M: int = 10, tol: float = 1e-5):
    """Converged lattice, solved once per session."""
    return solve_lattice(parse_family(family), N, M, tol)


# one representative per supported regime
REGIME_FAMILIES = {
    "AllRight": "negexp:0.5",
    "AllLeft": "exp:0.5",
    "AngleSquare": "pmom:3",
    "SymmetricChord": "pmom:1.5",
    "CornerRegime": "poly5:1.1",
}


def exp_V(lam, x1, x2):
    """Closed form on the strip for f = exp(lam t): a single left fan with m = lam/(1-lam) e^{lam t}."""
    q = 1.0 - np.abs(x2)
    return np.exp(lam * (x1 - q)) * (1.0 + lam * q / (1.0 - lam))


def exp_B(lam, y1, y2):
    q = 1.0 - np.sqrt(y1 * y1 + 1.0 - y2)
    return np.exp(lam * (y1 - q)) * (1.0 + lam * q / (1.0 - lam))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance bookkeeping: criterion -> [(label, ok, detail)]
ACCEPTANCE: dict = {}


def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[k]
        ok = all(r[1] for r in rows)
        tr.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}")
        for label, good, detail in rows:
            tr.write_line(f"    [{'pass' if good else 'FAIL'}] {label}: {detail}")

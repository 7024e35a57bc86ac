import numpy as np
import pytest

from bellman_strip.verify import (BATTERIES, REPORT_FORMAT, VerificationReport, check_boundary,
                                  check_concavity, check_diagonal, check_discrete_vs_closed, check_gluing,
                                  check_martingale, check_subordination, format_report, run_suite,
                                  write_report)

from conftest import grid_for, spec_for


@pytest.mark.parametrize("fam", ["exp:0.5", "negexp:0.5", "pmom:3", "pmom:1.5", "poly5:1.1"])
def test_foliation_checks_pass(fam):
    spec = spec_for(fam)
    for rep in (check_diagonal(fam, spec=spec), check_boundary(fam, spec=spec), check_gluing(fam, spec=spec),
                check_concavity(fam, spec=spec, n=2000)):
        assert rep.passed, rep.block()
        assert rep.residual <= rep.tol


def test_discrete_check_reports_domination():
    rep = check_discrete_vs_closed("quad", spec=spec_for("quad"), grid=grid_for("quad"))
    assert rep.passed
    assert float(rep.params["domination"]) <= 1e-9
    assert rep.residual < 1e-2


def test_martingale_check_with_band():
    rep = check_martingale("quad", depth=6, trials=200, spec=spec_for("quad"), band=1e-9)
    assert rep.passed and abs(rep.residual) < 1e-12
    rep = check_martingale("pmom:3", depth=4, trials=50, spec=spec_for("pmom:3"), band=1e-3)
    assert not rep.passed and rep.residual < -1e-3


def test_subordination_small():
    rep = check_subordination("exp:0.5", samples=[(0.0, 0.5)], depth=5, trials=300, spec=spec_for("exp:0.5"))
    assert rep.passed


def test_report_block_format():
    r = VerificationReport("demo[quad]", {"b": 2, "a": 1}, 1.5e-3, "x1=0", 1e-2, True, runtime=3.0)
    assert r.block() == ("[check demo[quad]]\na = 1\nb = 2\nresidual = 1.500000e-03\nlocus = x1=0\n"
                         "tol = 1.000e-02\nstatus = PASS\n")


def test_quick_suite_and_report(tmp_path):
    cfg = {"families": ["quad", "pmom:3"], "battery": "quick", "seed": 3}
    reports = run_suite(cfg)
    assert [r.name for r in reports] == sorted(r.name for r in reports)
    assert len(reports) == 2 * len(BATTERIES["quick"])
    text = format_report(reports, cfg)
    assert text.startswith(REPORT_FORMAT + "\n")
    assert "seed 3\n" in text and "summary 6/6 passed" in text
    assert "runtime" not in text
    p = tmp_path / "r.txt"
    write_report(reports, str(p), cfg)
    assert p.read_text() == text


def test_unknown_battery():
    with pytest.raises(ValueError):
        run_suite({"battery": "nope"})


def test_unsupported_family_is_reported_not_raised(tmp_path):
    t = np.linspace(-12, 12, 2401)
    path = tmp_path / "wave.csv"
    path.write_text("".join(f"{a},{b}\n" for a, b in zip(t.tolist(), (3 * np.sin(2 * t)).tolist())))
    reports = run_suite({"families": [f"table:{path}"], "battery": "quick"})
    assert len(reports) == 1 and not reports[0].passed and reports[0].name.startswith("foliation[")

import numpy as np
import pytest

from bellman_strip.cli import main, read_config
from bellman_strip.lattice import read_grid_csv, read_ppm


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_exp(capsys):
    code, out, _ = run(capsys, "eval", "--f", "exp:0.5", "--x1", "0", "--x2", "0")
    assert code == 0 and out.strip().startswith("1.213061")


def test_eval_B(capsys):
    code, out, _ = run(capsys, "eval", "--f", "quad", "--y1", "0.5", "--y2", "1.0")
    # B = y2 for f = t^2
    assert code == 0 and abs(float(out) - 1.0) < 1e-12


def test_malformed_family_prints_grammar(capsys):
    code, _, err = run(capsys, "eval", "--f", "exp:2")
    assert code == 2 and "family spec grammar" in err


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "eval", "--x2", "3")[0] == 2
    assert run(capsys, "eval", "--y1", "0")[0] == 2
    assert run(capsys, "--config", "/nonexistent/file", "eval")[0] == 2


def test_solve_and_classify(tmp_path, capsys):
    csv = tmp_path / "g.csv"
    code, out, _ = run(capsys, "solve-lattice", "--f", "pmom:3", "--n", "6", "--m", "3", "--out", str(csv))
    assert code == 0 and "iterations=" in out
    g = read_grid_csv(str(csv))
    assert g.values.shape == (13, 37)
    ppm = tmp_path / "sub" / "m.ppm"
    code, out, _ = run(capsys, "classify", "--f", "pmom:3", "--n", "6", "--m", "3", "--out", str(ppm))
    assert code == 0 and "Bilinear=" in out
    assert read_ppm(str(ppm)).shape == (13, 37, 3)


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# lattice run\nf = exp:0.5\nn = 4\nm = 2\ngauss-seidel = true\n")
    assert read_config(str(cfg)) == {"f": "exp:0.5", "n": "4", "m": "2", "gauss_seidel": "true"}
    code, out, _ = run(capsys, "--config", str(cfg), "solve-lattice")
    assert "family=exp:0.5 N=4 M=2" in out
    code, out, _ = run(capsys, "--config", str(cfg), "solve-lattice", "--n", "5")
    assert "N=5 M=2" in out


def test_foliation_round_trip(tmp_path, capsys):
    p = tmp_path / "s.json"
    code, out, _ = run(capsys, "foliation", "--f", "pmom:3", "--out", str(p))
    assert code == 0 and "AngleSquare" in out
    code, out, _ = run(capsys, "eval", "--spec", str(p), "--x1", "0", "--x2", "0")
    assert abs(float(out) - 3.0) < 1e-6


def test_simulate(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--f", "quad", "--depth", "5", "--trials", "100",
                       "--out", str(tmp_path / "t.json"))
    assert code == 0 and "payoff=1.0000000000" in out


def test_verify_exit_codes(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--battery", "quick", "--families", "quad", "--out",
                       str(tmp_path / "r.txt"))
    assert code == 0 and out.count("PASS") == 3
    t = np.linspace(-12, 12, 2401)
    wave = tmp_path / "wave.csv"
    wave.write_text("".join(f"{a},{b}\n" for a, b in zip(t.tolist(), (3 * np.sin(2 * t)).tolist())))
    code, out, _ = run(capsys, "verify", "--battery", "quick", "--families", f"table:{wave}")
    assert code == 1 and "FAIL" in out


def test_threads_flag(capsys):
    code, out, _ = run(capsys, "solve-lattice", "--f", "quad", "--n", "3", "--m", "2", "--threads", "2")
    assert code == 0

"""Command-line interface.

Subcommands: ``solve-lattice``, ``classify``, ``foliation``, ``eval``,
``verify``, ``simulate``.  A ``--config`` file of ``key=value`` lines
supplies defaults; explicit flags win.  Exit codes: 0 success, 1 a check
failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys


from .boundary import FAMILY_GRAMMAR, parse_family
from .errors import BellmanError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def read_config(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    cfg = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{ln}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    return cfg


def _common(p: argparse.ArgumentParser, lattice=False, point=False):
    p.add_argument("--f", dest="family", default="quad", help="boundary family (grammar in --help)")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=float, default=12.0, help="sampling half-width for unbounded fans")
    p.add_argument("--threads", type=int, default=None,
                   help="kernel threads (default: BELLMAN_THREADS, else all cores)")
    if lattice:
        p.add_argument("--n", type=int, default=30, help="vertical half-resolution N")
        p.add_argument("--m", type=int, default=10, help="horizontal half-width M")
        p.add_argument("--tol", type=float, default=1e-5, help="stopping rule on the sup-norm increment")
        p.add_argument("--gauss-seidel", action="store_true", help="in-place sweeps (same fixed point)")
    if point:
        p.add_argument("--x1", type=float, default=0.0)
        p.add_argument("--x2", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bellman-strip", description="Bellman functions for martingale transforms on the strip.",
                                 epilog=FAMILY_GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", default=None, help="key=value defaults file")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("solve-lattice", help="solve the discrete problem and write the grid CSV")
    _common(p, lattice=True)

    p = sub.add_parser("classify", help="solve, classify flatness and write the PPM map")
    _common(p, lattice=True)
    p.add_argument("--thresh", type=float, default=0.005)
    p.add_argument("--csv", default=None, help="also write the grid CSV here")

    p = sub.add_parser("foliation", help="build the foliation and write it as JSON")
    _common(p)

    p = sub.add_parser("eval", help="evaluate V at (x1, x2), or B at (y1, y2)")
    _common(p, point=True)
    p.add_argument("--y1", type=float, default=None)
    p.add_argument("--y2", type=float, default=None)
    p.add_argument("--spec", default=None, help="load a saved foliation instead of building one")

    p = sub.add_parser("verify", help="run a verification battery and write a report")
    _common(p, lattice=True)
    p.add_argument("--battery", default="standard", choices=["quick", "standard", "full"])
    p.add_argument("--families", default=None, help="comma-separated family list")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--trials", type=int, default=20_000)

    p = sub.add_parser("simulate", help="martingale lower-bound search")
    _common(p, point=True)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--mode", choices=["V", "U"], default="V")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    ns, _ = pre.parse_known_args(argv)
    if not ns.config:
        return
    cfg = read_config(ns.config)
    if "f" in cfg:
        cfg["family"] = cfg.pop("f")
    for action in ap._subparsers._group_actions:
        for sp in action.choices.values():
            known = {a.dest: a for a in sp._actions}
            defaults = {}
            for k, v in cfg.items():
                if k in known:
                    a = known[k]
                    if a.type is not None:
                        v = a.type(v)
                    elif isinstance(a.const, bool):
                        v = v.lower() in ("1", "true", "yes", "on")
                    defaults[k] = v
            sp.set_defaults(**defaults)


def _bd(args):
    return parse_family(args.family)


def _out(path):
    if path and os.path.dirname(path):
        os.makedirs(os.path.dirname(path), exist_ok=True)
    return path


# -- commands ----------------------------------------------------------------------------
def cmd_solve_lattice(args) -> int:
    from .lattice import export_grid_csv, solve_lattice
    g = solve_lattice(_bd(args), args.n, args.m, args.tol, gauss_seidel=args.gauss_seidel, threads=args.threads)
    if args.out:
        export_grid_csv(g, _out(args.out))
    last = g.sup_delta_history[-1] if g.sup_delta_history else 0.0
    print(f"family={g.family} N={g.N} M={g.M} iterations={g.iterations} sup_delta={last:.3e}")
    return EXIT_OK


def cmd_classify(args) -> int:
    from .lattice import classify_flatness, export_grid_csv, export_map_ppm, solve_lattice
    g = solve_lattice(_bd(args), args.n, args.m, args.tol, gauss_seidel=args.gauss_seidel, threads=args.threads)
    fm = classify_flatness(g, args.thresh)
    export_map_ppm(fm, _out(args.out or "flatness.ppm"))
    if args.csv:
        export_grid_csv(g, _out(args.csv))
    c = fm.counts()
    print(f"family={g.family} iterations={g.iterations} " + " ".join(f"{k}={v}" for k, v in c.items()))
    return EXIT_OK


def cmd_foliation(args) -> int:
    from .foliation import build_foliation_auto, dumps, save
    spec = build_foliation_auto(_bd(args), window=args.window)
    if args.out:
        save(spec, _out(args.out))
        print(repr(spec))
    else:
        print(dumps(spec))
    return EXIT_OK


def cmd_eval(args) -> int:
    from .foliation import build_foliation_auto, load
    spec = load(args.spec) if args.spec else build_foliation_auto(_bd(args), window=args.window)
    if args.y1 is not None or args.y2 is not None:
        if args.y1 is None or args.y2 is None:
            raise DomainError("--y1 and --y2 go together")
        print(f"{float(spec.eval_B(args.y1, args.y2)):.10g}")
    else:
        print(f"{float(spec.eval_V(args.x1, args.x2)):.10g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import DEFAULT_CONFIG, format_report, run_suite
    cfg = {"N": args.n, "M": args.m, "tol": args.tol, "seed": args.seed, "depth": args.depth,
           "trials": args.trials, "battery": args.battery}
    if args.families:
        cfg["families"] = [s.strip() for s in args.families.split(",") if s.strip()]
    for fam in cfg.get("families", DEFAULT_CONFIG["families"]):
        parse_family(fam)
    reports = run_suite(cfg)
    text = format_report(reports, cfg)
    if args.out:
        with open(_out(args.out), "w") as fh:
            fh.write(text)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} residual={r.residual:.3e} tol={r.tol:.1e}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_simulate(args) -> int:
    from .martingale import check_variance_identity, search_lower_bound
    bd = _bd(args)
    pay, tree = search_lower_bound(bd, (args.x1, args.x2), args.depth, args.trials, args.mode, args.seed)
    if args.out:
        with open(_out(args.out), "w") as fh:
            fh.write(tree.dumps())
            fh.write("\n")
    msg = f"payoff={pay:.10f}"
    if args.mode == "V":
        msg += f" variance_identity={check_variance_identity(tree):.3e}"
    print(msg)
    return EXIT_OK


COMMANDS = {
    "solve-lattice": cmd_solve_lattice,
    "classify": cmd_classify,
    "foliation": cmd_foliation,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
    except (OSError, DomainError, ValueError) as e:
        print(f"error: bad config: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.threads is not None or os.environ.get("BELLMAN_THREADS"):
        from .lattice import set_threads
        set_threads(args.threads)
    try:
        parse_family(args.family)
    except (DomainError, OSError) as e:
        print(f"error: {e}\n\n{FAMILY_GRAMMAR}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.cmd](args)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BellmanError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

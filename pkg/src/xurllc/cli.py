"""Command-line entry point: sweeps, figure recipes and validation suites."""

import argparse
import json
import os
import sys

from .config import parse_config
from .errors import ConfigError
from .recipes import RECIPES, run_sweep
from .validation import FAULTS, SUITES, run_validation

OUT_ENV = "XURLLC_OUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _add_run_flags(p):
    p.add_argument("--config", metavar="PATH", help="key = value scenario file")
    p.add_argument("--seed", type=int, help="RNG seed (drops, shadowing, simulation)")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--json", action="store_true", help="write JSON instead of CSV")
    p.add_argument("--inf-theta", action="store_true",
                   help="minimise UB-SDVP over the QoS exponent instead of fixing it")
    p.add_argument("--random-drop", action="store_true", help="uniform random UE distances")
    p.add_argument("--verify-exhaustive", action="store_true",
                   help="cross-check every pilot search by enumeration")
    p.add_argument("--workers", type=int, help="process pool size for sweep points")


def build_parser():
    parser = argparse.ArgumentParser(prog="xurllc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the sweep described by --config")
    _add_run_flags(p)

    p = sub.add_parser("validate", help="run oracle suites")
    p.add_argument("--suites", help=f"comma-separated subset of: {', '.join(SUITES)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-fault", choices=FAULTS, help="negative control")
    p.add_argument("--json", action="store_true")

    sub.add_parser("list-recipes", help="list figure recipes")
    for name, recipe in RECIPES.items():
        p = sub.add_parser(name, help=recipe.summary)
        _add_run_flags(p)
    return parser


def _overrides(args):
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.workers is not None:
        out["workers"] = args.workers
    for flag in ("inf_theta", "random_drop", "verify_exhaustive"):
        if getattr(args, flag):
            out[flag] = True
    return out


def _output_path(args, default_name):
    out_dir = os.environ.get(OUT_ENV)
    path = args.out
    if path is None and out_dir:
        path = f"{default_name}.{'json' if args.json else 'csv'}"
    if path is not None and out_dir and not os.path.isabs(path):
        path = os.path.join(out_dir, path)
    return path


def _emit(table, args, default_name):
    path = _output_path(args, default_name)
    if path is None:
        (table.to_json if args.json else table.to_csv)(sys.stdout)
        return
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        (table.to_json if args.json else table.to_csv)(fh)


def _run(args):
    if args.command == "sweep":
        scenario = parse_config(args.config, _overrides(args))
        _emit(run_sweep(scenario), args, "sweep")
        return EXIT_OK
    recipe = RECIPES[args.command]
    scenario = parse_config(args.config, _overrides(args), base=recipe.scenario())
    _emit(recipe.run(scenario), args, recipe.name)
    return EXIT_OK


def _validate(args):
    names = [s.strip() for s in args.suites.split(",")] if args.suites else None
    try:
        results = run_validation(names, seed=args.seed, fault=args.inject_fault)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    if args.json:
        payload = {r.name: {"passed": r.passed,
                            "checks": [{"check": c, "passed": ok, "info": i}
                                       for c, ok, i in r.checks]} for r in results}
        json.dump(payload, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        for r in results:
            for label, ok, info in r.checks:
                print(f"{r.name}\t{'PASS' if ok else 'FAIL'}\t{label}" + (f"\t{info}" if info else ""))
            print(f"{r.name}\t{'PASS' if r.passed else 'FAIL'}\t(suite)")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-recipes":
            for name, recipe in RECIPES.items():
                print(f"{name}\t{recipe.summary}")
            return EXIT_OK
        if args.command == "validate":
            return _validate(args)
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

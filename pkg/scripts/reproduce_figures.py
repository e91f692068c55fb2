"""Run every figure recipe and write one CSV per figure.

    python3 scripts/reproduce_figures.py --out-dir results --only fig2a fig4
"""

import argparse
import os
import time

from xurllc.config import apply_settings
from xurllc.recipes import RECIPES


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--only", nargs="*", choices=sorted(RECIPES), help="subset of recipes")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for name in args.only or list(RECIPES):
        recipe = RECIPES[name]
        scenario = apply_settings(recipe.scenario(), {"seed": args.seed, "workers": args.workers})
        t0 = time.perf_counter()
        table = recipe.run(scenario)
        path = os.path.join(args.out_dir, f"{name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            table.to_csv(fh)
        print(f"{name}: {len(table.rows)} rows -> {path} ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()

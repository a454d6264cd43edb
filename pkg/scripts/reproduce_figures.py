"""Write the figure surfaces and the rate table as CSV files.

Usage: python scripts/reproduce_figures.py [OUT_DIR] [--alpha A] [--n N]
"""
import argparse
import pathlib
import sys

from bellmd.cli import main

FIGURES = ("fig1a", "fig1b", "fig2a", "fig2b", "fig5", "rates")


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", nargs="?", default="figures")
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--n", type=int, default=50)
    args = parser.parse_args(argv)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fig in FIGURES:
        path = out / f"{fig}.csv"
        code = main(["sweep", fig, "--alpha", str(args.alpha), "--n", str(args.n), "--out", str(path)])
        if code:
            return code
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(run())

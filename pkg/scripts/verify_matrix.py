"""Run the closed-form vs oracle matrix and print a summary.

Usage: python scripts/verify_matrix.py [OUT_JSON] [--grid G] [--restarts R] [--jobs J]
Checks chain3 and pfb(0.5), pfb(1), pfb(1.5) for both input distributions.
"""
import argparse
import sys

from bellmd.cli import main


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", nargs="?", default="verify.json")
    parser.add_argument("--grid", type=int, default=10)
    parser.add_argument("--restarts", type=int, default=4)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    return main(["verify", "--chain", "--alpha", "0.5", "--alpha", "1", "--alpha", "1.5",
                 "--grid", str(args.grid), "--restarts", str(args.restarts),
                 "--jobs", str(args.jobs), "--out", args.out])


if __name__ == "__main__":
    sys.exit(run())

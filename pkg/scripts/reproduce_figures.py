"""Regenerate the two-player example: limiting strategies, costs and both horizon figures.

    python3 scripts/reproduce_figures.py --out results/example
"""
import argparse
from pathlib import Path

from lqgame.cli import main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results/example"))
    p.add_argument("--no-svg", action="store_true", help="skip the matplotlib plots")
    return p.parse_args()


if __name__ == "__main__":
    args = parse_args()
    fmt = "csv" if args.no_svg else "csv,svg"
    raise SystemExit(main(["reproduce-paper", "--out", str(args.out), "--format", fmt]))

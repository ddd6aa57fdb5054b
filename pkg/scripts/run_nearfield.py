#!/usr/bin/env python3
"""Sweep the deployment area and report near-field probabilities.

Runs the fixed-array architectures over growing square deployment areas
and prints, per architecture and area, the fraction of devices inside the
Rayleigh distance of the array. Writes the raw records to a CSV.

Usage:
    python3 scripts/run_nearfield.py --out-dir results [--seed 0]
"""

import argparse
import sys
from pathlib import Path

from mawet.cli import main as mawet_main


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--areas", default="2,8,16",
                        help="comma-separated square side lengths in m")
    parser.add_argument("--arch", default="ula,ura")
    parser.add_argument("--n", default="9,16")
    parser.add_argument("--deployments", type=int, default=10)
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return mawet_main([
        "nearfield", "--seed", str(args.seed), "--arch", args.arch,
        "--n", args.n, "--k", "3", "--area", args.areas,
        "--deployments", str(args.deployments),
        "--out", str(out / "nearfield.csv")])


if __name__ == "__main__":
    sys.exit(run())

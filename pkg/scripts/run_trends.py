#!/usr/bin/env python3
"""Run the transmit-power trend experiments and write result CSVs.

Produces one CSV per sweep: power versus antenna count (all architectures,
K devices fixed) and power versus device count (N antennas fixed). Both
use the same seed, so deployments are shared across sweeps and
architectures. Expect a long run at the default swarm settings.

Usage:
    python3 scripts/run_trends.py --out-dir results [--seed 0] [--k 3]
"""

import argparse
import sys
from pathlib import Path

from mawet.cli import main as mawet_main


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=3,
                        help="device count for the antenna sweep")
    parser.add_argument("--n", type=int, default=9,
                        help="antenna count for the device sweep")
    parser.add_argument("--deployments", type=int, default=10)
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    common = ["--seed", str(args.seed),
              "--deployments", str(args.deployments)]

    rc = mawet_main(["sweep-n", "--k", str(args.k),
                     "--out", str(out / "power_vs_n.csv")] + common)
    if rc != 0:
        return rc
    return mawet_main(["sweep-k", "--n", str(args.n),
                       "--out", str(out / "power_vs_k.csv")] + common)


if __name__ == "__main__":
    sys.exit(run())

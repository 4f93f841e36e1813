#!/usr/bin/env python3
"""Batch comparison on the operational-profile synthetic instance.

Generates the 26-egress-set topology with a jittered traffic-matrix batch,
runs the optimistic / resulting / bgp-aware comparison on every matrix, and
leaves report.csv plus per-mode CDF files in the output directory.  The full
2,512-matrix batch is supported but slow in pure Python; the default batch
keeps the experiment at coffee-break scale.
"""

import argparse
import sys
from pathlib import Path

from hotlwo.cli import main as cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/operational")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--tms", type=int, default=24, help="batch size (paper scale: 2512)")
    parser.add_argument("--iterations", type=int, default=12)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    out = Path(args.out)
    rc = cli([
        "gen", "--kind", "operational", "--seed", str(args.seed),
        "--tms", str(args.tms), "--out", str(out),
    ])
    if rc:
        return rc
    tms = sorted(str(p) for p in out.glob("tm_*.txt"))
    return cli([
        "compare", str(out / "topology.txt"), *tms,
        "--seed", str(args.seed),
        "--iterations", str(args.iterations),
        "--workers", str(args.workers),
        "--out", str(out),
    ])


if __name__ == "__main__":
    sys.exit(main())

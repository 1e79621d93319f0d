"""Sweep every family over the four kernels and write a CSV report.

Usage: python3 scripts/run_sweep.py --out results.csv [--ns 64,256,1024] [--bandwidths unlimited,1g]
"""

import argparse
import logging
import sys

from mpcforge.bench import BANDWIDTHS, SweepSpec, emit_report, sweep
from mpcforge.engine import FAMILIES
from mpcforge.kernels import KERNELS


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--families", default=",".join(FAMILIES))
    ap.add_argument("--kernels", default=",".join(KERNELS))
    ap.add_argument("--ns", default="64,256,1024", help="vector lengths; matmul uses the cube root order")
    ap.add_argument("--bits", default="64")
    ap.add_argument("--bandwidths", default="unlimited")
    ap.add_argument("--timeout", type=float, default=600.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="sweep.csv")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    bws = args.bandwidths.split(",")
    unknown = [b for b in bws if b not in BANDWIDTHS]
    if unknown:
        ap.error(f"unknown bandwidths {unknown}")
    families = args.families.split(",")
    ns = [int(v) for v in args.ns.split(",")]
    bits = [int(v) for v in args.bits.split(",")]
    reports = []
    for kernel in args.kernels.split(","):
        # matmul is n x n: map the requested length to the matrix order
        sizes = sorted({max(2, round(n ** (1 / 3))) for n in ns}) if kernel == "matmul" else ns
        for fam in families:
            parties = (4,) if fam == "Rep4" else (3,)
            spec = SweepSpec([fam], [kernel], sizes, bits, parties, bws, args.seed, args.timeout)
            reports += sweep(spec)
    emit_report(reports, args.out, args.format)
    bad = [r for r in reports if r.status != "ok"]
    print(f"{len(reports)} runs, {len(bad)} not ok, written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

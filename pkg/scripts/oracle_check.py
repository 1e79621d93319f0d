"""Run every family and kernel on seeded inputs and compare with the plaintext result.

Usage: python3 scripts/oracle_check.py [--trials 10] [--n 16]
"""

import argparse
import sys

from mpcforge.engine import FAMILIES, ProtocolConfig, Runtime
from mpcforge.kernels import KERNELS, execute, make_inputs, plain_kernel

SMALL = {"Semi": dict(prime=31), "SpdzField": dict(prime=31), "Shamir": dict(prime=31),
         "MalShamir": dict(prime=31), "Rep4": dict(bits=8, n_parties=4),
         "FurukawaBin": dict(bits=8, value_bits=8)}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--n", type=int, default=16)
    args = ap.parse_args(argv)
    mismatches = 0
    for fam in FAMILIES:
        for kernel in KERNELS:
            n = max(2, round(args.n ** (1 / 3))) if kernel == "matmul" else args.n
            bad = 0
            for seed in range(args.trials):
                cfg = ProtocolConfig(fam, seed=seed, **SMALL.get(fam, dict(bits=8)))
                data = make_inputs(cfg, kernel, n, seed)
                bad += execute(Runtime(cfg), kernel, n, data) != plain_kernel(cfg, kernel, n, data)
            mismatches += bad
            print(f"{fam:12s} {kernel:8s} n={n:<4d} {args.trials - bad}/{args.trials} match")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run every gate table, experiment and the efficiency report in one go.

Writes into --out (default: reproduction/) and exits non-zero if any row or
assertion fails.
"""

import argparse
import sys

from memspike.cli import main as cli

COMMANDS = [
    ["simulate", "square-wave"],
    *[["gate", name, "--table", "--calibrate", "--traces"] for name in ("not", "and", "or", "xor", "full-adder")],
    ["experiment", "habituation"],
    ["experiment", "summation"],
    ["experiment", "order-sweep"],
    ["analyze"],
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="reproduction")
    ap.add_argument("--params", help="device parameter JSON")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    common = ["--out", args.out, "--seed", str(args.seed)]
    if args.params:
        common += ["--params", args.params]
    failed = []
    for argv in COMMANDS:
        print(f"\n$ memspike {' '.join(argv)}")
        if cli(common + argv) != 0:
            failed.append(" ".join(argv))
    if failed:
        print(f"\nfailed: {', '.join(failed)}")
        return 1
    print(f"\nall commands passed; outputs in {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())

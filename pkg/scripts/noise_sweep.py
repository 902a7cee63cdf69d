#!/usr/bin/env python3
"""Calibration margin of every gate channel as measurement noise grows.

Prints a table and writes noise_sweep.csv (gate, channel, sigma_A, margin_A).
A negative margin means the noisy response clusters overlap.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from memspike.device import DeviceParams, load_params
from memspike.gates import PRESET_NAMES, load_gate, noise_margin_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", help="device parameter JSON")
    ap.add_argument("--max-sigma", type=float, default=3e-8)
    ap.add_argument("--points", type=int, default=7)
    ap.add_argument("--reps", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()

    params = load_params(args.params) if args.params else DeviceParams()
    sigmas = np.linspace(0.0, args.max_sigma, args.points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in PRESET_NAMES:
        gate = load_gate(name)
        for ch in gate.channels:
            for sigma, margin in noise_margin_sweep(gate, params, sigmas, args.reps, args.seed, ch.name):
                rows.append((name, ch.name, sigma, margin))
                print(f"{name:11s} {ch.name:12s} sigma={sigma:9.3g} A  margin={margin:+10.3g} A")

    with open(out / "noise_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("gate", "channel", "sigma_A", "margin_A"))
        w.writerows((g, c, repr(s), repr(m)) for g, c, s, m in rows)
    print(f"wrote {out / 'noise_sweep.csv'}")


if __name__ == "__main__":
    main()

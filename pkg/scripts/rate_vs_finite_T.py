#!/usr/bin/env python3
"""Limit trajectory v*(s), its cubic approximation, and finite-T argmax curves of the simplified model."""

import argparse
import csv
import sys

import numpy as np

from elliptic_excursions.asymptotics import cubic_trajectory, zero_curve
from elliptic_excursions.measures import argmax_trajectory
from elliptic_excursions.weights import ModelParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ts", default="100,500")
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    Ts = [int(t) for t in args.Ts.split(",")]
    recs = {T: argmax_trajectory(ModelParams.simplified_sigma3(T)).x_max / T for T in Ts}
    s_grid = np.round(np.arange(0, 2 + 1e-9, args.step), 10)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["s", "v_star", "v_cubic"] + [f"v_T{T}" for T in Ts])
    for s in s_grid:
        row = [s, zero_curve(s), cubic_trajectory(s)]
        row += [float(np.interp(s, np.arange(2 * T + 1) / T, recs[T])) for T in Ts]
        w.writerow(f"{x:.17g}" for x in row)


if __name__ == "__main__":
    main()

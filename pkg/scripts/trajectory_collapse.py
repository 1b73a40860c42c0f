#!/usr/bin/env python3
"""Scaled argmax trajectories x_max(sT)/T for several T, plus the pairwise collapse gap."""

import argparse
import csv
import sys

from elliptic_excursions.measures import interpolated_gap, scaled_trajectory
from elliptic_excursions.weights import ModelParams

MAKERS = {
    "simplified": ModelParams.simplified_sigma3,
    "trig": ModelParams.trig_sigma6,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", choices=["simplified", "trig", "elliptic"], default="simplified")
    ap.add_argument("--Ts", default="50,100,250")
    ap.add_argument("--kappa", type=float, default=0.5)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    Ts = [int(t) for t in args.Ts.split(",")]
    make = MAKERS.get(args.family, lambda T: ModelParams.elliptic_sigma6(T, args.kappa))
    curves = {T: scaled_trajectory(make(T)) for T in Ts}
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["T", "s", "v"])
    for T, (s, v) in curves.items():
        w.writerows((T, f"{a:.17g}", f"{b:.17g}") for a, b in zip(s, v))
    for a, b in zip(Ts, Ts[1:]):
        print(f"gap T={a} vs T={b}: {interpolated_gap(*curves[a], *curves[b]):.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Sample bridge paths and compare the t=T histogram with the exact law."""

import argparse

import numpy as np

from elliptic_excursions.measures import sample_positions, single_time_distribution
from elliptic_excursions.weights import ModelParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, default=20)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kappa", type=float, default=None, help="use the elliptic specialization with this kappa")
    args = ap.parse_args(argv)
    p = ModelParams.trig_sigma6(args.T) if args.kappa is None else ModelParams.elliptic_sigma6(args.T, args.kappa)
    pos = sample_positions(p, args.n, seed=args.seed)
    d = single_time_distribution(args.T, p)
    print("x,exact,empirical,z")
    for x, prob in d.support:
        emp = float(np.mean(pos[:, args.T] == x))
        se = np.sqrt(max(prob * (1 - prob), 1e-300) / args.n)
        print(f"{x},{prob:.6g},{emp:.6g},{(emp - prob) / se:+.2f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Residual and second moment of the scaled t=T law against the limit normal and the Brownian bridge."""

import argparse

from elliptic_excursions.asymptotics import (
    CLT_VARIANCE,
    brownian_bridge_density,
    clt_empirical_residual,
    clt_second_moment,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ts", default="25,50,100,200,400,800")
    args = ap.parse_args(argv)
    print(f"limit variance {CLT_VARIANCE:.6f}, Brownian bridge 0.5")
    print("T,residual_f,residual_bb,second_moment")
    for T in (int(t) for t in args.Ts.split(",")):
        rf = clt_empirical_residual(T)
        rb = clt_empirical_residual(T, density=lambda x: brownian_bridge_density(1.0, x))
        print(f"{T},{rf:.6g},{rb:.6g},{clt_second_moment(T):.6f}")


if __name__ == "__main__":
    main()

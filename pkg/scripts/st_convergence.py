#!/usr/bin/env python3
"""Decile correlations of the Sato-Tate model as the number of primes grows."""
import argparse

from murmurlab.sato_tate import STModelConfig, convergence_in_P


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=500_000)
    ap.add_argument("--counts", type=int, nargs="+", default=[5, 10, 15, 20, 25, 40])
    args = ap.parse_args(argv)
    rep = convergence_in_P(STModelConfig(samples=args.samples), args.counts)
    for k, row, wm in zip(rep.prime_counts, rep.values, rep.weighted_means):
        print(f"P={k:3d}  d1={row[0]:+.3f}  d10={row[-1]:+.3f}  mean={wm:+.4f}")
    print("max successive change:", [f"{c:.4f}" for c in rep.successive_change])
    print("fitted decay exponent:", rep.decay_exponent)


if __name__ == "__main__":
    main()

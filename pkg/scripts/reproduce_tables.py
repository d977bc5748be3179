#!/usr/bin/env python3
"""Render the decomposition tables for every builtin example distribution.

Usage:
    python scripts/reproduce_tables.py [--pointwise] [--precision N]
"""

import argparse

from sxpid import builtins, measures, report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pointwise", action="store_true")
    ap.add_argument("--precision", type=int, default=4)
    args = ap.parse_args()

    names = ["xor", "pwunq", "rnd", "rnderr", "xorduplicate", "parity:3",
             "parity:4"]
    for name in names:
        d = builtins.builtin_distribution(name)
        decs = measures.decompose_support(d)
        avg = measures.average_decomposition(d, decompositions=decs)
        print(f"=== {name} ({d.n_sources} sources, "
              f"{len(decs[0].nodes)} atoms) ===")
        if args.pointwise:
            print(report.render_pointwise_tables(d, decs, args.precision))
            print()
        print(report.render_average_table(avg, args.precision))
        print()


if __name__ == "__main__":
    main()

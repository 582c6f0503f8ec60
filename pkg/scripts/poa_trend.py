"""Price of anarchy for n agents of equal accuracy, weighted and pure."""

import argparse
import csv
import sys

from liquidweights.games import price_of_anarchy, price_of_anarchy_pure
from liquidweights.optimal import MAX_PURE_N


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.6)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1, 3, 5, 9, 15, 25, 51, 101, 201])
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout)
    out.writerow(["n", "optimum", "poa", "poa_pure", "limit"])
    for n in args.sizes:
        p = price_of_anarchy([args.q] * n)
        pure = price_of_anarchy_pure([args.q] * n).poa if n <= MAX_PURE_N else ""
        out.writerow([n, p.optimum, p.poa, pure, 1 / args.q])


if __name__ == "__main__":
    main()

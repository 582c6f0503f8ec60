"""Log-odds optimum against random weighted profiles and the best pure profile.

Prints one CSV row per instance: n, optimum, best random profile, best pure.
"""

import argparse
import csv
import sys

import numpy as np

from liquidweights.accuracy import batch_group_accuracy
from liquidweights.model import batch_expected_weights
from liquidweights.optimal import best_pure_accuracy, max_weighted_accuracy


def random_stack(rng, count, n):
    Ds = rng.dirichlet(np.ones(n), size=(count, n)) * (rng.random((count, n, n)) < 0.6)
    Ds[:, np.arange(n), rng.integers(0, n, n)] += 1e-3
    return Ds / Ds.sum(axis=2, keepdims=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--profiles", type=int, default=1000)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    out = csv.writer(sys.stdout)
    out.writerow(["n", "optimum", "best_random", "best_pure"])
    for _ in range(args.instances):
        n = int(rng.integers(2, args.max_n + 1))
        q = rng.uniform(0.55, 0.95, n)
        W = batch_expected_weights(random_stack(rng, args.profiles, n))
        W = W[W.sum(axis=1) > 0]
        out.writerow([n, max_weighted_accuracy(q), batch_group_accuracy(q, W).max(), best_pure_accuracy(q).value])


if __name__ == "__main__":
    main()

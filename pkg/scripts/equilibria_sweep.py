"""Best-response dynamics on random GD games and the share-utility check.

For each game: rounds to converge, whether the fixed point is acyclic, its
accuracy against the max-accuracy equilibrium of the complete network, and
the share-NE verdict.
"""

import argparse
import csv
import sys

import numpy as np

from liquidweights.accuracy import profile_accuracy
from liquidweights.games import best_response_dynamics, construct_max_accuracy_NE, gd_utilities
from liquidweights.model import Network, WeightedProfile, is_acyclic
from liquidweights.shares import is_Uhat_NE


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=30)
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--edge-prob", type=float, default=1.0)
    ap.add_argument("--budget", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    out = csv.writer(sys.stdout)
    out.writerow(["game", "n", "rounds", "converged", "acyclic", "accuracy", "max_ne_accuracy_complete", "share_ne"])
    for k in range(args.games):
        n = int(rng.integers(2, args.max_n + 1))
        q = rng.uniform(0.5, 0.95, n)
        net = Network(n, frozenset((i, j) for i in range(n) for j in range(n) if rng.random() < args.edge_prob))
        res = best_response_dynamics(WeightedProfile.identity(n), gd_utilities(q), net)
        D = res.outcome.profile
        best = profile_accuracy(q, construct_max_accuracy_NE(q)).value
        share = is_Uhat_NE(D, gd_utilities(q), net, args.budget, seed=k).is_equilibrium
        out.writerow([k, n, res.rounds, res.converged, is_acyclic(D), profile_accuracy(q, D).value, best, share])


if __name__ == "__main__":
    main()

"""Accuracy-optimal delegation.

Optimal voting weights are proportional to the log-odds of accuracy.  A
one-hop weighted profile realises them exactly: strong agents keep their
vote, weak agents keep ``w*_i`` of theirs and split the rest across the
strong agents in proportion to each one's surplus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .accuracy import group_accuracy
from .errors import AllUninformative, InstanceTooLarge, PerfectAgent
from .model import WeightedProfile, accuracies

ONE_TOL = 1e-12  # |w*_i - 1| below this counts as exactly 1
CLAMP = 1.0 - 1e-12
MAX_PURE_N = 12


@dataclass(frozen=True)
class OptimalWeights:
    w_star: np.ndarray
    N1: frozenset  # w*_i < 1: give weight away
    N2: frozenset  # w*_i > 1: receive weight
    surplus: float  # total excess weight of N2


def log_odds(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.log(q) - np.log1p(-q)


def optimal_weights(q, clamp: bool = False) -> OptimalWeights:
    q = accuracies(q)
    if clamp:
        q = np.minimum(q, CLAMP)
    else:
        perfect = np.flatnonzero(q >= 1.0)
        if perfect.size:
            raise PerfectAgent(int(perfect[0]))
    lo = log_odds(q)
    total = lo.sum()
    if total <= 0.0:
        raise AllUninformative()
    n = q.size
    w = n * lo / total
    N1 = frozenset(int(i) for i in np.flatnonzero(w < 1.0 - ONE_TOL))
    N2 = frozenset(int(i) for i in np.flatnonzero(w > 1.0 + ONE_TOL))
    surplus = float(sum(w[i] - 1.0 for i in sorted(N2)))
    w.flags.writeable = False
    return OptimalWeights(w, N1, N2, surplus)


def algorithm1(q, clamp: bool = False) -> WeightedProfile:
    """One-hop weighted profile whose expected weights are the log-odds optimum."""
    ow = optimal_weights(q, clamp=clamp)
    n = ow.w_star.size
    D = np.eye(n)
    if not ow.N2:
        return WeightedProfile(D)
    strong = sorted(ow.N2)
    share = np.array([ow.w_star[j] - 1.0 for j in strong]) / ow.surplus
    for i in sorted(ow.N1):
        give = (1.0 - ow.w_star[i]) * share
        D[i, strong] = give
        D[i, i] = 1.0 - give.sum()
    return WeightedProfile(D)


def _partitions(n: int, k: int, largest: int | None = None):
    """Partitions of n into exactly k positive parts, non-increasing."""
    if largest is None:
        largest = n
    if k == 1:
        if 1 <= n <= largest:
            yield (n,)
        return
    for first in range(min(largest, n - (k - 1)), 0, -1):
        if first * k < n:
            break
        for rest in _partitions(n - first, k - 1, first):
            yield (first,) + rest


@dataclass(frozen=True)
class PureOptimum:
    value: float
    weights: np.ndarray  # guru weights, 0 for delegators
    profile: tuple  # one-hop pure profile realising the weights


def best_pure_accuracy(q, *, tie_rule: str = "split", max_n: int = MAX_PURE_N) -> PureOptimum:
    """Best group accuracy reachable with pure delegations on a complete network.

    Only weight multisets are searched.  The k most accurate agents form the
    best k-guru set (accuracy is monotone in each guru's q), and larger
    weights belong with more accurate gurus (swapping two gurus' weights
    toward the better one never hurts), so each partition of n is tried once.
    """
    q = accuracies(q)
    n = q.size
    if n > max_n:
        raise InstanceTooLarge(n, max_n)
    order = sorted(range(n), key=lambda i: (-q[i], i))
    best_value = -1.0
    best_w = None
    # most gurus first; near-equal values keep the witness with fewest delegations
    for k in range(n, 0, -1):
        top = order[:k]
        for parts in _partitions(n, k):
            w = np.zeros(n)
            w[top] = parts
            value = group_accuracy(q, w, tie_rule=tie_rule).value
            if value > best_value + 1e-12:
                best_value, best_w = value, w
    return PureOptimum(best_value, best_w, realise_pure(best_w))


def realise_pure(weights) -> tuple:
    """One-hop pure profile giving each guru its integer weight."""
    w = np.asarray(weights)
    n = w.size
    gurus = [i for i in range(n) if w[i] > 0]
    delegators = [i for i in range(n) if w[i] == 0]
    d = list(range(n))
    it = iter(delegators)
    for g in gurus:
        for _ in range(int(round(w[g])) - 1):
            d[next(it)] = g
    return tuple(d)


def max_weighted_accuracy(q, **kwargs) -> float:
    ow = optimal_weights(q)
    return group_accuracy(q, ow.w_star, **kwargs).value


__all__ = [
    "OptimalWeights",
    "PureOptimum",
    "algorithm1",
    "best_pure_accuracy",
    "log_odds",
    "max_weighted_accuracy",
    "optimal_weights",
    "realise_pure",
]

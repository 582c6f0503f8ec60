"""Weighted-majority group accuracy.

The exact route enumerates coalitions of gurus.  Gurus sharing the same
(weight, accuracy) pair are exchangeable, so they are grouped into classes
and only the number of correct voters per class is enumerated, weighted by
binomial counts.  With all-distinct gurus this is the plain 2^g subset sum.

Ties.  ``tie_rule="split"`` (default) credits an exact tie with one half,
i.e. a fair coin decides.  ``tie_rule="inclusive"`` counts a tie as a win for
the correct side, the literal ``>=`` winning-coalition definition; it makes
two equal-weight gurus worth ``1 - (1-qa)(1-qb)``, which beats the log-odds
optimum, so it is kept as an option only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NoGurus, TooManyGurus
from .model import DEFAULT_CAP, _batch_weights, _support_batches, accuracies, as_matrix

DEFAULT_MAX_GURUS = 25
TIE_EPS = 1e-9

_TIE_CREDIT = {"split": 0.5, "inclusive": 1.0}


@dataclass(frozen=True)
class AccuracyReport:
    value: float
    method: str
    guru_count: int
    standard_error: Optional[float] = None
    winning_coalition_count: Optional[int] = None


def _tie_credit(tie_rule: str) -> float:
    try:
        return _TIE_CREDIT[tie_rule]
    except KeyError:
        raise ValueError(f"unknown tie rule {tie_rule!r}") from None


def _prepare(q, w):
    q = accuracies(q)
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != q.shape:
        raise ValueError(f"accuracies have {q.size} entries, weights have {w.size}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    gurus = np.flatnonzero(w > 0)
    if gurus.size == 0:
        raise NoGurus()
    return q, w, gurus


def _classes(q, w, gurus):
    keys = sorted({(float(w[i]), float(q[i])) for i in gurus})
    sizes = [0] * len(keys)
    pos = {k: c for c, k in enumerate(keys)}
    for i in gurus:
        sizes[pos[(float(w[i]), float(q[i]))]] += 1
    weights = np.array([k[0] for k in keys])
    probs = np.array([k[1] for k in keys])
    return weights, probs, sizes


def group_accuracy(q, w, *, tie_rule: str = "split", max_gurus: int = DEFAULT_MAX_GURUS,
                   chunk: int = 1 << 18) -> AccuracyReport:
    """Probability that the weighted majority of gurus (w > 0) is correct."""
    q, w, gurus = _prepare(q, w)
    credit = _tie_credit(tie_rule)
    cw, cp, sizes = _classes(q, w, gurus)
    K = len(sizes)
    radices = [s + 1 for s in sizes]
    combos = math.prod(radices)
    if combos > 2**max_gurus:
        raise TooManyGurus(combos, max_gurus)

    total = float(w[gurus].sum())
    eps = TIE_EPS * total
    pmf = [
        np.array([math.comb(s, c) * cp[k] ** c * (1.0 - cp[k]) ** (s - c) for c in range(s + 1)])
        for k, s in enumerate(sizes)
    ]
    singletons = all(s == 1 for s in sizes)
    counts = None if singletons else [[math.comb(s, c) for c in range(s + 1)] for s in sizes]
    strides = [math.prod(radices[k + 1:]) for k in range(K)]

    partial = []
    n_winning = 0
    for start in range(0, combos, chunk):
        idx = np.arange(start, min(combos, start + chunk))
        correct = np.zeros(idx.size)
        prob = np.ones(idx.size)
        digits = []
        for k in range(K):
            c = (idx // strides[k]) % radices[k]
            digits.append(c)
            correct += c * cw[k]
            prob *= pmf[k][c]
        margin = 2.0 * correct - total
        win = margin > eps
        tie = np.abs(margin) <= eps
        partial.append(float(prob[win].sum()) + credit * float(prob[tie].sum()))
        member = win | tie
        if singletons:
            n_winning += int(np.count_nonzero(member))
        else:
            for row in np.flatnonzero(member):
                n_winning += math.prod(counts[k][int(digits[k][row])] for k in range(K))
    value = min(1.0, max(0.0, math.fsum(partial)))
    return AccuracyReport(value, "exact", int(gurus.size), winning_coalition_count=n_winning)


def batch_group_accuracy(q, W, *, tie_rule: str = "split", max_n: int = 16) -> np.ndarray:
    """Exact group accuracy for each row of a weight stack W (B x n), small n.

    Enumerates all 2^n correctness patterns once; agents with weight 0 do not
    affect the margin, so non-gurus need no special handling.
    """
    q = accuracies(q)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    n = q.size
    if W.shape[1] != n:
        raise ValueError(f"accuracies have {n} entries, weights have {W.shape[1]}")
    if n > max_n:
        raise TooManyGurus(2**n, max_n)
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValueError("weights must be finite and nonnegative")
    total = W.sum(axis=1)
    if np.any(total <= 0):
        raise NoGurus()
    credit = _tie_credit(tie_rule)
    S = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    prob = np.prod(np.where(S == 1, q, 1.0 - q), axis=1)
    margin = 2.0 * (W @ S.T) - total[:, None]
    eps = TIE_EPS * total[:, None]
    score = (margin > eps) + credit * (np.abs(margin) <= eps)
    return np.clip(score @ prob, 0.0, 1.0)


def group_accuracy_mc(q, w, samples: int, seed: int, *, tie_rule: str = "split",
                      chunk: int = 1 << 15) -> AccuracyReport:
    """Monte-Carlo estimate: independent votes per guru, seeded."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    q, w, gurus = _prepare(q, w)
    credit = _tie_credit(tie_rule)
    qg = q[gurus]
    wg = w[gurus]
    total = float(wg.sum())
    eps = TIE_EPS * total
    rng = np.random.default_rng(seed)
    score = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        correct = (rng.random((m, gurus.size)) < qg) @ wg
        margin = 2.0 * correct - total
        score += float(np.count_nonzero(margin > eps)) + credit * float(np.count_nonzero(np.abs(margin) <= eps))
        done += m
    value = score / samples
    se = math.sqrt(value * (1.0 - value) / samples)
    return AccuracyReport(value, "monte_carlo", int(gurus.size), standard_error=se)


def profile_accuracy(q, D, **kwargs) -> AccuracyReport:
    """Group accuracy of a weighted profile through its expected weights."""
    from .model import expected_weights

    return group_accuracy(q, expected_weights(D, method="paths"), **kwargs)


def realized_profile_accuracy(q, D, *, tie_rule: str = "split", cap: int = DEFAULT_CAP) -> float:
    """Non-canonical diagnostic: expected majority accuracy over realized pure profiles.

    This averages the accuracy of each sampled delegation graph instead of
    scoring the expected weights once; the two generally differ.  Profiles in
    which every vote is lost to cycles score 0.
    """
    q = accuracies(q)
    D = as_matrix(D)
    cache: dict[bytes, float] = {}
    acc = 0.0
    for d, prob in _support_batches(D, cap):
        W = _batch_weights(d)
        for wrow, p in zip(W, prob):
            key = wrow.tobytes()
            if key not in cache:
                cache[key] = 0.0 if not wrow.any() else group_accuracy(q, wrow, tie_rule=tie_rule).value
            acc += p * cache[key]
    return acc

"""Slow, independent reference computations used only by the tests.

Everything here is written from the definitions with plain Python loops and
exact arithmetic where it is cheap, sharing no code with the package.
"""

import itertools
from fractions import Fraction
from math import comb

import numpy as np


def guru_of(d, i):
    seen = set()
    while d[i] != i:
        if i in seen:
            return None
        seen.add(i)
        i = d[i]
    return i


def pure_weights(d):
    w = [0] * len(d)
    for i in range(len(d)):
        g = guru_of(d, i)
        if g is not None:
            w[g] += 1
    return w


def all_profiles(D):
    """Every pure profile with its probability, by a plain Cartesian product."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    supports = [[j for j in range(n) if D[i, j] > 0] for i in range(n)]
    for d in itertools.product(*supports):
        p = 1.0
        for i, j in enumerate(d):
            p *= D[i, j]
        yield d, p


def expected_weights(D):
    n = len(D)
    w = np.zeros(n)
    for d, p in all_profiles(D):
        w += p * np.array(pure_weights(d))
    return w


def guru_probabilities(D):
    """P[i, g] = probability that g is the guru of i."""
    n = len(D)
    P = np.zeros((n, n))
    for d, p in all_profiles(D):
        for i in range(n):
            g = guru_of(d, i)
            if g is not None:
                P[i, g] += p
    return P


def mixing_utilities(D, u):
    return (guru_probabilities(D) * np.asarray(u)).sum(axis=1)


def group_accuracy(q, w, tie_credit=0.5):
    """Sum over every subset of gurus that votes correctly."""
    gurus = [i for i in range(len(w)) if w[i] > 0]
    total = sum(w[i] for i in gurus)
    acc = 0.0
    for r in range(len(gurus) + 1):
        for C in itertools.combinations(gurus, r):
            p = 1.0
            for i in gurus:
                p *= q[i] if i in C else 1 - q[i]
            s = sum(w[i] for i in C)
            if 2 * s > total + 1e-9 * total:
                acc += p
            elif abs(2 * s - total) <= 1e-9 * total:
                acc += tie_credit * p
    return acc


def best_pure_accuracy(q, tie_credit=0.5):
    """Maximum over all n^n pure profiles on the complete network."""
    n = len(q)
    best = -1.0
    for d in itertools.product(range(n), repeat=n):
        w = pure_weights(d)
        if any(w):
            best = max(best, group_accuracy(q, w, tie_credit))
    return best


def majority_exact(n, q):
    """Exact simple-majority accuracy of n equal voters, ties split evenly."""
    q = Fraction(q)
    total = Fraction(0)
    for k in range(n + 1):
        p = comb(n, k) * q**k * (1 - q) ** (n - k)
        if 2 * k > n:
            total += p
        elif 2 * k == n:
            total += p / 2
    return total


def absorption(D, i):
    """Limit share distribution from a unit vote at i, via the fundamental matrix.

    Requires every closed class to be a single absorbing agent.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    absorbing = [j for j in range(n) if D[j, j] == 1.0]
    transient = [j for j in range(n) if j not in absorbing]
    chi = np.zeros(n)
    if i in absorbing:
        chi[i] = 1.0
        return chi
    Q = D[np.ix_(transient, transient)]
    R = D[np.ix_(transient, absorbing)]
    B = np.linalg.solve(np.eye(len(transient)) - Q, R)
    chi[absorbing] = B[transient.index(i)]
    return chi


def grid_best_value(D, u, i, steps=200):
    """Best U_i over a dense grid of agent i's mixed rows (two-agent games)."""
    D = np.array(D, dtype=float)
    best = -np.inf
    for t in np.linspace(0.0, 1.0, steps + 1):
        D[i] = [t, 1 - t]
        best = max(best, mixing_utilities(D, u)[i])
    return best


def absorbed_agents(D):
    """Agents whose every reachable closed class is one self-voter (via networkx condensation)."""
    import networkx as nx

    D = np.asarray(D)
    G = nx.DiGraph()
    G.add_nodes_from(range(len(D)))
    G.add_edges_from((int(i), int(j)) for i, j in zip(*np.nonzero(D)) if i != j)
    C = nx.condensation(G)
    bad = {c for c in C.nodes if C.out_degree(c) == 0 and len(C.nodes[c]["members"]) > 1}
    ok = np.ones(len(D), dtype=bool)
    for c in C.nodes:
        if (nx.descendants(C, c) | {c}) & bad:
            ok[list(C.nodes[c]["members"])] = False
    return ok

"""Delegation games under the mixing utility.

``u[i][j]`` is what agent ``i`` gets when ``j`` ends up as its guru; a
delegation cycle yields 0.  ``U_i(D)`` is the expectation of ``u[i][guru(i)]``
when rows of ``D`` are drawn independently.  Because ``U_i`` is affine in
agent ``i``'s own row, checking pure deviations is enough for equilibrium.

Greedy delegation (GD) games set ``u[i][j] = q_j`` for every ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .accuracy import group_accuracy
from .errors import InstanceTooLarge, SupportTooLarge
from .model import (
    DEFAULT_CAP,
    Network,
    WeightedProfile,
    _batch_weights,
    _resolve_batch,
    accuracies,
    as_profile,
    expected_weights,
    guru_distribution,
    guru_distribution_enumerated,
    is_acyclic,
    sample_guru_distribution,
    unit_row,
)
from .optimal import algorithm1, best_pure_accuracy

DEV_TOL = 1e-9
MAX_PURE_NE_N = 7


def gd_utilities(q) -> np.ndarray:
    q = accuracies(q)
    return np.tile(q, (q.size, 1))


def is_gd(u) -> bool:
    u = np.asarray(u, dtype=float)
    return bool(np.all(u == u[0]))


def _utility_matrix(u, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (n, n):
        raise ValueError(f"utility matrix must be {n} x {n}, got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("utility entries must be finite")
    return u


def _network(D: WeightedProfile, network: Optional[Network]) -> Network:
    if network is not None:
        return network
    if D.network is not None:
        return D.network
    return Network.complete(D.n)


def utilities_U(D, u, *, method: str = "paths", cap: int = DEFAULT_CAP, sample_fallback: bool = False,
                samples: int = 100_000, seed: int = 0) -> tuple[np.ndarray, str]:
    """Mixing utility of every agent, and the method that produced it.

    ``paths`` and ``enumerate`` are exact; with ``sample_fallback`` a
    SupportTooLarge guard falls back to seeded sampling.
    """
    D = as_profile(D)
    u = _utility_matrix(u, D.n)
    try:
        if method == "paths":
            P = guru_distribution(D, cap)
        elif method == "enumerate":
            P = guru_distribution_enumerated(D, cap)
        elif method == "sample":
            P = sample_guru_distribution(D, samples, seed)
        else:
            raise ValueError(f"unknown method {method!r}")
    except SupportTooLarge:
        if not sample_fallback:
            raise
        method = "sample"
        P = sample_guru_distribution(D, samples, seed)
    return (P * u).sum(axis=1), method


def utility_U(D, u, i: int, **kwargs) -> float:
    return float(utilities_U(D, u, **kwargs)[0][i])


def deviation_utility(D, u, i: int, row) -> float:
    """U_i after agent i replaces its row."""
    D = as_profile(D)
    u = _utility_matrix(u, D.n)
    D2 = WeightedProfile(D.D).with_row(i, row)
    P = guru_distribution(D2, sources=[i])
    return float(P[i] @ u[i])


def _pure_values(D: WeightedProfile, u: np.ndarray, i: int, targets) -> list[float]:
    return [deviation_utility(D, u, i, unit_row(D.n, j)) for j in targets]


def best_response(D, u, i: int, network: Optional[Network] = None) -> tuple[int, float]:
    """Best pure delegation for agent i; ties go to the lowest index."""
    D = as_profile(D)
    u = _utility_matrix(u, D.n)
    targets = _network(D, network).neighbours(i)
    values = _pure_values(D, u, i, targets)
    top = max(values)
    for j, v in zip(targets, values):
        if v >= top - DEV_TOL:
            return j, v
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class GameOutcome:
    profile: WeightedProfile
    utilities: np.ndarray
    is_equilibrium: bool
    deviations_checked: str
    max_gain: float = 0.0
    violation: Optional[tuple] = None  # (agent, deviation, gain) of the largest gain


def is_U_NE(D, u, network: Optional[Network] = None) -> GameOutcome:
    D = as_profile(D)
    u = _utility_matrix(u, D.n)
    net = _network(D, network)
    current, _ = utilities_U(D, u)
    best_gain, violation = -math.inf, None
    count = 0
    for i in range(D.n):
        targets = net.neighbours(i)
        for j, v in zip(targets, _pure_values(D, u, i, targets)):
            count += 1
            gain = v - current[i]
            if gain > best_gain:
                best_gain, violation = gain, (i, j, gain)
    ok = bool(best_gain <= DEV_TOL)
    return GameOutcome(D, current, ok, f"all {count} pure deviations within the network",
                       max(best_gain, 0.0), None if ok else violation)


@dataclass(frozen=True)
class Move:
    round: int
    agent: int
    target: int
    before: float
    after: float


@dataclass(frozen=True)
class DynamicsResult:
    outcome: GameOutcome
    trace: list = field(default_factory=list)
    converged: bool = False
    rounds: int = 0


def best_response_dynamics(start, u, network: Optional[Network] = None, order: str = "round_robin",
                           seed: Optional[int] = None, max_rounds: int = 1000) -> DynamicsResult:
    """Sequential pure best responses until a full round changes nothing."""
    D = as_profile(start)
    u = _utility_matrix(u, D.n)
    net = _network(D, network)
    if order not in ("round_robin", "random"):
        raise ValueError(f"unknown order {order!r}")
    rng = np.random.default_rng(seed) if order == "random" else None
    trace = []
    converged = False
    rounds = 0
    for r in range(max_rounds):
        rounds = r + 1
        moved = False
        agents = range(D.n) if rng is None else rng.permutation(D.n).tolist()
        for i in agents:
            before = utility_U(D, u, i)
            j, after = best_response(D, u, i, net)
            if after > before + DEV_TOL:
                D = D.with_row(i, unit_row(D.n, j))
                trace.append(Move(r, i, j, before, after))
                moved = True
        if not moved:
            converged = True
            break
    return DynamicsResult(is_U_NE(D, u, net), trace, converged, rounds)


def construct_max_accuracy_NE(q) -> WeightedProfile:
    """Most accurate agents keep their vote; everyone else splits evenly across them."""
    q = accuracies(q)
    n = q.size
    top = np.flatnonzero(q == q.max())
    D = np.zeros((n, n))
    D[:, top] = 1.0 / top.size
    D[top] = 0.0
    D[top, top] = 1.0
    return WeightedProfile(D)


def single_guru_NE(q) -> WeightedProfile:
    """Everyone delegates to the lowest-indexed most accurate agent."""
    q = accuracies(q)
    return WeightedProfile.from_pure([int(np.argmax(q))] * q.size)


@dataclass(frozen=True)
class PriceOfAnarchy:
    poa: float
    optimum: float
    worst_ne: float


def price_of_anarchy(q, **kwargs) -> PriceOfAnarchy:
    """Optimum over weighted profiles against the single-guru equilibrium."""
    q = accuracies(q)
    optimum = group_accuracy(q, expected_weights(algorithm1(q), method="paths"), **kwargs).value
    worst = float(q.max())
    return PriceOfAnarchy(optimum / worst, optimum, worst)


def price_of_anarchy_pure(q, **kwargs) -> PriceOfAnarchy:
    q = accuracies(q)
    optimum = best_pure_accuracy(q, **kwargs).value
    worst = float(q.max())
    return PriceOfAnarchy(optimum / worst, optimum, worst)


@dataclass(frozen=True)
class Lemma1Verdict:
    holds: bool
    is_equilibrium: bool
    acyclic: bool
    failed: Optional[str] = None


def check_lemma1(D, u, network: Optional[Network] = None) -> Lemma1Verdict:
    """Equilibria of GD games have acyclic delegation graphs."""
    if not is_gd(u):
        raise ValueError("check_lemma1 needs a GD utility matrix (identical rows)")
    eq = is_U_NE(D, u, network).is_equilibrium
    acyclic = is_acyclic(D)
    holds = acyclic or not eq
    return Lemma1Verdict(holds, eq, acyclic, None if holds else "equilibrium with a delegation cycle")


# ---------------------------------------------------------------------------
# exhaustive pure profiles


def _pure_batches(options: list, chunk: int):
    sizes = [len(o) for o in options]
    total = math.prod(sizes)
    n = len(options)
    strides = [math.prod(sizes[i + 1:]) for i in range(n)]
    opts = [np.asarray(o) for o in options]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        d = np.empty((idx.size, n), dtype=np.int64)
        for i in range(n):
            d[:, i] = opts[i][(idx // strides[i]) % sizes[i]]
        yield d


def pure_equilibria(u, network: Optional[Network] = None, max_n: int = MAX_PURE_NE_N,
                    chunk: int = 1 << 15) -> np.ndarray:
    """All pure profiles that are equilibria, by brute force over every profile."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if n > max_n:
        raise InstanceTooLarge(n, max_n)
    u = _utility_matrix(u, n)
    net = network or Network.complete(n)
    options = [net.neighbours(i) for i in range(n)]
    agents = np.arange(n)
    found = []
    for d in _pure_batches(options, chunk):
        m = d.shape[0]
        g = _resolve_batch(d)
        has = g >= 0
        gi = np.where(has, g, 0)
        current = np.where(has, u[agents[None, :], gi], 0.0)
        # onpath[b, j, k]: agent k lies on the chain starting at j
        onpath = np.zeros((m, n, n), dtype=bool)
        pos = np.broadcast_to(agents, (m, n)).copy()
        rows = np.arange(m)[:, None]
        for _ in range(n):
            onpath[rows, agents[None, :], pos] = True
            pos = np.take_along_axis(d, pos, axis=1)
        ok = np.ones(m, dtype=bool)
        for i in range(n):
            best = np.full(m, -np.inf)
            for j in options[i]:
                if j == i:
                    val = np.full(m, u[i, i])
                else:
                    blocked = onpath[:, j, i] | ~has[:, j]
                    val = np.where(blocked, 0.0, u[i, gi[:, j]])
                best = np.maximum(best, val)
            ok &= current[:, i] >= best - DEV_TOL
        found.append(d[ok])
    return np.concatenate(found) if found else np.empty((0, n), dtype=np.int64)


def best_pure_ne_accuracy(q, network: Optional[Network] = None, **kwargs) -> tuple[float, tuple]:
    """Highest group accuracy over all pure equilibria of the GD game."""
    q = accuracies(q)
    eqs = pure_equilibria(gd_utilities(q), network)
    if eqs.shape[0] == 0:
        return -math.inf, ()
    W = _batch_weights(eqs)
    uniq, first = np.unique(W, axis=0, return_index=True)
    best, witness = -math.inf, ()
    for w, k in zip(uniq, first):
        if not w.any():
            continue
        v = group_accuracy(q, w, **kwargs).value
        if v > best:
            best, witness = v, tuple(int(x) for x in eqs[k])
    return best, witness

"""Weights read as shares of voting power.

Every round each agent passes ``D[i][j]`` of whatever weight it currently
holds to ``j``: ``w(t+1) = w(t) D``.  An agent's apportionment ``chi_i`` is
the limit of this process started from its own unit vote.

Convergence is numeric (max-norm step below ``epsilon``).  The share utility
``U_hat_i`` pays ``sum_j u[i][j] chi_i(j)`` only when the limit sits with
gurus, i.e. agents that keep their whole holding; shares still circulating
inside a closed group of two or more agents count as unrepresented (0).
``semantics="stationary"`` drops that requirement and pays on any numeric
limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from .games import DEV_TOL, GameOutcome, _network, construct_max_accuracy_NE, gd_utilities, is_U_NE
from .games import best_response_dynamics, single_guru_NE
from .model import Network, WeightedProfile, accuracies, as_matrix, as_profile, unit_row

EPS_CONV = 1e-12
MAX_ITER = 10**5
DEFAULT_BUDGET = 200


@dataclass(frozen=True)
class ShareTrajectory:
    iterates: list
    converged: bool
    fixpoint: Optional[np.ndarray]
    iterations_used: int
    status: str  # converged | periodic | max_iter


def power_iterate(D, w0, epsilon: float = EPS_CONV, max_iter: int = MAX_ITER) -> ShareTrajectory:
    """Literal step-by-step share transfer, keeping every iterate."""
    if epsilon <= 0 or max_iter < 1:
        raise ValueError("need epsilon > 0 and max_iter >= 1")
    D = as_matrix(D)
    w = np.asarray(w0, dtype=float).reshape(-1)
    if w.size != D.shape[0]:
        raise ValueError("initial weights and matrix sizes differ")
    iterates = [w]
    for t in range(1, max_iter + 1):
        nxt = iterates[-1] @ D
        iterates.append(nxt)
        if np.max(np.abs(nxt - iterates[-2])) < epsilon:
            return ShareTrajectory(iterates, True, nxt, t, "converged")
        if t >= 2 and np.max(np.abs(nxt - iterates[-3])) < epsilon:
            return ShareTrajectory(iterates, False, None, t, "periodic")
    return ShareTrajectory(iterates, False, None, max_iter, "max_iter")


def share_limit(D: np.ndarray, x: np.ndarray, epsilon: float, max_iter: int):
    """Checkpointed power iteration: tests at t = 0, 1, 3, 7, ... using squared powers."""
    t = 0
    P = D
    y = x
    while True:
        y1 = y @ D
        if np.max(np.abs(y1 - y)) < epsilon:
            return y1, True, t + 1, "converged"
        if np.max(np.abs(y1 @ D - y)) < epsilon:
            return None, False, t + 2, "periodic"
        step = t + 1
        if t + step > max_iter:
            return None, False, t, "max_iter"
        y = y @ P
        t += step
        P = P @ P


@dataclass(frozen=True)
class Apportionment:
    chi: Optional[np.ndarray]
    owner: int
    converged: bool
    status: str
    iterations_used: int
    absorbed: bool  # limit held entirely by agents keeping their whole vote


def _absorbing_reach(D: np.ndarray) -> np.ndarray:
    """Per agent: every closed group reachable from it is a single self-voter.

    Equivalently, every agent reachable from it can still reach an agent
    that keeps its whole vote.
    """
    A = D > 0
    n = D.shape[0]
    drains = np.diag(D) == 1.0
    for _ in range(n):
        nxt = drains | (A & drains[None, :]).any(axis=1)
        if np.array_equal(nxt, drains):
            break
        drains = nxt
    reach = np.eye(n, dtype=bool)
    for _ in range(n):
        nxt = reach | ((reach.astype(np.int64) @ A.astype(np.int64)) > 0)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return ~(reach & ~drains[None, :]).any(axis=1)


def apportionment(D, i: int, epsilon: float = EPS_CONV, max_iter: int = MAX_ITER) -> Apportionment:
    return _apportionment(as_matrix(D), i, epsilon, max_iter)


def _apportionment(D: np.ndarray, i: int, epsilon: float, max_iter: int) -> Apportionment:
    chi, converged, used, status = share_limit(D, unit_row(D.shape[0], i), epsilon, max_iter)
    return Apportionment(chi, i, converged, status, used, bool(_absorbing_reach(D)[i]))


def stationary_weights(D, epsilon: float = EPS_CONV, max_iter: int = MAX_ITER) -> Optional[np.ndarray]:
    """Group weights after iterated transfer from one vote each, if they settle."""
    D = as_matrix(D)
    w, converged, _, _ = share_limit(D, np.ones(D.shape[0]), epsilon, max_iter)
    return w if converged else None


def utility_hat(D, u, i: int, epsilon: float = EPS_CONV, max_iter: int = MAX_ITER,
                semantics: str = "absorbing") -> float:
    if semantics not in ("absorbing", "stationary"):
        raise ValueError(f"unknown semantics {semantics!r}")
    return _utility_hat(as_matrix(D), np.asarray(u, dtype=float), i, epsilon, max_iter, semantics)


def _utility_hat(D: np.ndarray, u: np.ndarray, i: int, epsilon: float, max_iter: int, semantics: str) -> float:
    a = _apportionment(D, i, epsilon, max_iter)
    if not a.converged or (semantics == "absorbing" and not a.absorbed):
        return 0.0
    return float(u[i] @ a.chi)


@dataclass(frozen=True)
class ChainClass:
    members: tuple
    closed: bool
    period: int


@dataclass(frozen=True)
class ChainStructure:
    irreducible: bool
    aperiodic: bool
    classes: list


def _period(G: nx.DiGraph, members) -> int:
    members = set(members)
    root = min(members)
    level = {root: 0}
    queue = [root]
    for v in queue:
        for w in G.successors(v):
            if w in members and w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    g = 0
    for v in members:
        for w in G.successors(v):
            if w in members:
                g = math.gcd(g, level[v] + 1 - level[w])
    return g  # 0 means no cycle at all (transient singleton)


def chain_structure(D) -> ChainStructure:
    """Irreducibility and per-class periods of the positive-entry graph (self-loops included)."""
    D = as_matrix(D)
    n = D.shape[0]
    G = nx.DiGraph()
    G.add_nodes_from(range(n))
    G.add_edges_from((int(i), int(j)) for i, j in zip(*np.nonzero(D)))
    classes = []
    for comp in sorted(nx.strongly_connected_components(G), key=min):
        closed = all(w in comp for v in comp for w in G.successors(v))
        classes.append(ChainClass(tuple(sorted(comp)), closed, _period(G, comp)))
    irreducible = len(classes) == 1
    aperiodic = all(c.period == 1 for c in classes if c.closed)
    return ChainStructure(irreducible, aperiodic, classes)


def is_Uhat_NE(D, u, network: Optional[Network] = None, deviation_budget: int = DEFAULT_BUDGET,
               seed: int = 0, semantics: str = "absorbing", epsilon: float = EPS_CONV,
               max_iter: int = MAX_ITER) -> GameOutcome:
    """Check every pure deviation plus ``deviation_budget`` seeded random rows per agent.

    The share utility is not affine in an agent's own row, so this is a
    sampled check over the mixed rows, not a certificate.
    """
    D = as_profile(D)
    u = np.asarray(u, dtype=float)
    net = _network(D, network)
    n = D.n
    rng = np.random.default_rng(seed)
    M = D.D
    current = np.array([utility_hat(M, u, i, epsilon, max_iter, semantics) for i in range(n)])
    best_gain, violation = -math.inf, None
    pure = mixed = 0
    for i in range(n):
        targets = net.neighbours(i)
        rows = [(f"pure->{j}", unit_row(n, j)) for j in targets]
        for k in range(deviation_budget if len(targets) > 1 else 0):
            row = np.zeros(n)
            row[targets] = rng.dirichlet(np.ones(len(targets)))
            rows.append((f"mixed#{k}", row))
        for label, row in rows:
            trial = M.copy()
            trial[i] = row
            gain = _utility_hat(trial, u, i, epsilon, max_iter, semantics) - current[i]
            if label.startswith("pure"):
                pure += 1
            else:
                mixed += 1
            if gain > best_gain:
                best_gain, violation = gain, (i, row.tolist(), gain)
    ok = bool(best_gain <= DEV_TOL)
    desc = f"{pure} pure and {mixed} seeded random mixed deviations (seed {seed}, {semantics} limit)"
    return GameOutcome(D, current, ok, desc, max(best_gain, 0.0), None if ok else violation)


@dataclass(frozen=True)
class Theorem4Report:
    checked: int
    passed: int
    failures: list = field(default_factory=list)
    converse_is_U_NE: bool = True
    converse_is_Uhat_NE: bool = False

    @property
    def holds(self) -> bool:
        return self.checked == self.passed and not self.converse_is_U_NE and self.converse_is_Uhat_NE


def _candidate_profiles(q, net: Network, rng: np.random.Generator):
    n = q.size
    if net.is_complete:
        yield "max_accuracy", construct_max_accuracy_NE(q)
        yield "single_guru", single_guru_NE(q)
    u = gd_utilities(q)
    starts = [("identity", WeightedProfile.identity(n))]
    d = [int(rng.choice(net.neighbours(i))) for i in range(n)]
    starts.append(("random_pure", WeightedProfile.from_pure(d)))
    for name, start in starts:
        res = best_response_dynamics(start, u, net)
        if res.converged:
            yield f"dynamics_from_{name}", res.outcome.profile


CONVERSE_Q = (0.9, 0.6)
CONVERSE_D = ((1.0, 0.0), (0.5, 0.5))


def theorem4_harness(instances, seed: int = 0, deviation_budget: int = DEFAULT_BUDGET) -> Theorem4Report:
    """Every U-NE found must pass the share-utility check; the converse must fail.

    ``instances`` holds accuracy vectors or ``(accuracies, network)`` pairs.
    """
    rng = np.random.default_rng(seed)
    checked = passed = 0
    failures = []
    for k, inst in enumerate(instances):
        q, net = (inst if isinstance(inst, tuple) else (inst, None))
        q = accuracies(q)
        net = net or Network.complete(q.size)
        u = gd_utilities(q)
        for name, D in _candidate_profiles(q, net, rng):
            if not is_U_NE(D, u, net).is_equilibrium:
                continue
            checked += 1
            out = is_Uhat_NE(D, u, net, deviation_budget, seed=seed + k)
            if out.is_equilibrium:
                passed += 1
            else:
                failures.append((k, name, out.violation))
    u2 = gd_utilities(CONVERSE_Q)
    return Theorem4Report(
        checked, passed, failures,
        bool(is_U_NE(CONVERSE_D, u2).is_equilibrium),
        bool(is_Uhat_NE(CONVERSE_D, u2, deviation_budget=deviation_budget, seed=seed).is_equilibrium),
    )

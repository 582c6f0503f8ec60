"""Core delegation model: accuracies, networks, pure and weighted profiles.

Agents are indexed 0..n-1.  A pure profile ``d`` maps every agent to its
delegation target (``d[i] == i`` marks a guru).  A weighted profile is a
row-stochastic matrix ``D`` whose row ``i`` is agent ``i``'s apportionment;
read probabilistically, rows are drawn independently to produce a pure profile.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import networkx as nx
import numpy as np

from .errors import InstanceTooLarge, InvalidInstance, SupportTooLarge

ROW_TOL = 1e-9
DEFAULT_CAP = 10**6

PureProfile = tuple  # tuple[int, ...], d[i] = delegation target of agent i


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class AccuracyProfile:
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        if q.size < 1:
            raise InvalidInstance("accuracies: need at least one agent")
        if not np.all(np.isfinite(q)):
            raise InvalidInstance("accuracies: entries must be finite")
        bad = np.flatnonzero((q < 0.5) | (q > 1.0))
        if bad.size:
            i = int(bad[0])
            raise InvalidInstance(f"accuracies[{i}] = {float(q[i])!r} outside [0.5, 1.0]")
        object.__setattr__(self, "q", _frozen(q))

    @property
    def n(self) -> int:
        return self.q.size


def accuracies(q) -> np.ndarray:
    """Validated accuracy vector from an AccuracyProfile or any sequence."""
    if isinstance(q, AccuracyProfile):
        return q.q
    return AccuracyProfile(q).q


@dataclass(frozen=True)
class Network:
    """Directed graph of permitted delegations; self-delegation always allowed."""

    n: int
    edges: frozenset = field(default=frozenset())

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInstance("network: need at least one agent")
        edges = set()
        for e in self.edges:
            i, j = (int(x) for x in e)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInstance(f"network edge {[i, j]} out of range for n={self.n}")
            edges.add((i, j))
        edges.update((i, i) for i in range(self.n))
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def complete(cls, n: int) -> "Network":
        return cls(n, frozenset(itertools.product(range(n), repeat=2)))

    @property
    def is_complete(self) -> bool:
        return len(self.edges) == self.n * self.n

    def allows(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def neighbours(self, i: int) -> list[int]:
        """R(i), sorted, always containing i."""
        return sorted(j for (a, j) in self.edges if a == i)


@dataclass(frozen=True)
class WeightedProfile:
    """Row-stochastic delegation matrix.

    Rows within ``ROW_TOL`` of summing to one are renormalised; anything else
    is rejected.  If a network is attached, positive entries must be edges.
    """

    D: np.ndarray
    network: Optional[Network] = None

    def __post_init__(self):
        D = np.array(self.D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise InvalidInstance(f"delegation: expected an n x n matrix, got shape {D.shape}")
        if not np.all(np.isfinite(D)):
            raise InvalidInstance("delegation: entries must be finite")
        n = D.shape[0]
        for i in range(n):
            row = D[i]
            j = int(np.argmin(row))
            if row[j] < -ROW_TOL:
                raise InvalidInstance(f"delegation[{i}][{j}] = {float(row[j])!r} is negative")
            if np.any(row > 1.0 + ROW_TOL):
                raise InvalidInstance(f"delegation row {i} has an entry above 1")
            s = row.sum()
            if abs(s - 1.0) > ROW_TOL:
                raise InvalidInstance(f"delegation row {i} sums to {float(s)!r}, not 1")
        D = np.clip(D, 0.0, 1.0)
        D /= D.sum(axis=1, keepdims=True)
        if self.network is not None:
            if self.network.n != n:
                raise InvalidInstance(f"network has {self.network.n} agents, delegation has {n}")
            for i, j in zip(*np.nonzero(D)):
                if not self.network.allows(int(i), int(j)):
                    raise InvalidInstance(f"delegation[{i}][{j}] > 0 but ({i}, {j}) is not a network edge")
        object.__setattr__(self, "D", _frozen(D))

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @classmethod
    def identity(cls, n: int, network: Optional[Network] = None) -> "WeightedProfile":
        return cls(np.eye(n), network)

    @classmethod
    def from_pure(cls, d: Sequence[int], network: Optional[Network] = None) -> "WeightedProfile":
        n = len(d)
        D = np.zeros((n, n))
        D[np.arange(n), np.asarray(d, dtype=int)] = 1.0
        return cls(D, network)

    def with_row(self, i: int, row) -> "WeightedProfile":
        D = self.D.copy()
        D[i] = row
        return WeightedProfile(D, self.network)


def as_matrix(D) -> np.ndarray:
    if isinstance(D, WeightedProfile):
        return D.D
    return WeightedProfile(D).D


def as_profile(D) -> WeightedProfile:
    if isinstance(D, WeightedProfile):
        return D
    return WeightedProfile(D)


def unit_row(n: int, j: int) -> np.ndarray:
    row = np.zeros(n)
    row[j] = 1.0
    return row


# ---------------------------------------------------------------------------
# pure profiles


@dataclass(frozen=True)
class GuruResolution:
    guru: tuple  # per agent: guru index, or None when trapped by a cycle
    weights: np.ndarray
    gurus: frozenset


def _check_pure(d) -> np.ndarray:
    d = np.asarray(d, dtype=int).reshape(-1)
    n = d.size
    if n < 1 or np.any(d < 0) or np.any(d >= n):
        raise InvalidInstance(f"pure profile entries must lie in 0..{n - 1}")
    return d


def resolve_gurus(d) -> GuruResolution:
    """Follow every delegation chain to its guru.

    Agents on a cycle, or whose chain runs into one, get no guru; their
    vote is lost rather than redistributed.
    """
    d = _check_pure(d)
    n = d.size
    guru: list[Optional[int]] = [None] * n
    state = [0] * n  # 0 unvisited, 1 on current path, 2 settled
    for start in range(n):
        path = []
        v = start
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = int(d[v])
        if state[v] == 2:
            result = guru[v]
        elif d[v] == v:
            result = v
        else:
            result = None  # closed a cycle on the current path
        for a in path:
            guru[a] = result
            state[a] = 2
    weights = np.zeros(n)
    for g in guru:
        if g is not None:
            weights[g] += 1.0
    return GuruResolution(tuple(guru), _frozen(weights), frozenset(g for g in guru if g is not None))


def profile_probability(D, d) -> float:
    D = as_matrix(D)
    d = _check_pure(d)
    if d.size != D.shape[0]:
        raise InvalidInstance("profile and delegation matrix sizes differ")
    return math.prod(float(D[i, d[i]]) for i in range(d.size))


def _resolve_batch(d: np.ndarray) -> np.ndarray:
    """Guru index per (row, agent) for a batch of pure profiles; -1 inside cycles."""
    m, n = d.shape
    g = d
    for _ in range(max(1, math.ceil(math.log2(n)) + 1)):
        g = np.take_along_axis(g, g, axis=1)
    is_guru = np.take_along_axis(d, g, axis=1) == g
    return np.where(is_guru, g, -1)


def _batch_weights(d: np.ndarray) -> np.ndarray:
    m, n = d.shape
    g = _resolve_batch(d)
    rows = np.broadcast_to(np.arange(m)[:, None], g.shape)
    ok = g >= 0
    flat = rows[ok] * n + g[ok]
    return np.bincount(flat, minlength=m * n).reshape(m, n).astype(float)


def support_size(D) -> int:
    D = as_matrix(D)
    return math.prod(int(np.count_nonzero(row)) for row in D)


def _support_batches(D: np.ndarray, cap: int, chunk: int = 1 << 16):
    supports = [np.flatnonzero(row > 0) for row in D]
    sizes = [s.size for s in supports]
    total = math.prod(sizes)
    if total > cap:
        raise SupportTooLarge(total, cap)
    n = len(sizes)
    # lexicographic order, last agent varying fastest
    strides = [math.prod(sizes[i + 1:]) for i in range(n)]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        d = np.empty((idx.size, n), dtype=np.int64)
        prob = np.ones(idx.size)
        for i in range(n):
            k = (idx // strides[i]) % sizes[i]
            d[:, i] = supports[i][k]
            prob *= D[i, d[:, i]]
        yield d, prob


def support_profiles(D, cap: int = DEFAULT_CAP) -> Iterator[tuple[tuple, float]]:
    """Every pure profile with positive probability, with its probability."""
    D = as_matrix(D)
    for d, prob in _support_batches(D, cap):
        for row, p in zip(d.tolist(), prob.tolist()):
            yield tuple(row), p


# ---------------------------------------------------------------------------
# expected weights


def guru_distribution(D, cap: int = DEFAULT_CAP, sources=None) -> np.ndarray:
    """P[s, g] = probability that agent s ends up with guru g.

    Rows are drawn independently, so the chain from s visits fresh agents
    until it reaches a self-delegation (guru) or revisits an agent (cycle,
    no guru).  Summing over self-avoiding paths gives the same quantity as
    summing over whole support profiles.  Rows outside ``sources`` stay 0.
    """
    D = as_matrix(D)
    n = D.shape[0]
    stay = np.diag(D).tolist()
    succ = [[(int(u), float(D[v, u])) for u in np.flatnonzero(D[v] > 0) if u != v] for v in range(n)]
    P = np.zeros((n, n))
    explored = 0
    for s in range(n) if sources is None else sources:
        stack = [(s, 1.0, 1 << s)]
        while stack:
            v, p, mask = stack.pop()
            explored += 1
            if explored > cap:
                raise SupportTooLarge(explored, cap)
            if stay[v] > 0:
                P[s, v] += p * stay[v]
            for u, duv in succ[v]:
                if not (mask >> u) & 1:
                    stack.append((u, p * duv, mask | (1 << u)))
    return P


def guru_distribution_enumerated(D, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Same quantity as :func:`guru_distribution`, by summing over support profiles."""
    D = as_matrix(D)
    n = D.shape[0]
    P = np.zeros((n, n))
    for d, prob in _support_batches(D, cap):
        g = _resolve_batch(d)
        for s in range(n):
            ok = g[:, s] >= 0
            P[s] += np.bincount(g[ok, s], weights=prob[ok], minlength=n)
    return P


def sample_guru_distribution(D, samples: int, seed: int, chunk: int = 8192) -> np.ndarray:
    """Monte-Carlo estimate of :func:`guru_distribution`."""
    D = as_matrix(D)
    n = D.shape[0]
    P = np.zeros((n, n))
    for d in _sample_profiles(D, samples, seed, chunk):
        g = _resolve_batch(d)
        for s in range(n):
            ok = g[:, s] >= 0
            P[s] += np.bincount(g[ok, s], minlength=n)
    return P / samples


def _sample_profiles(D: np.ndarray, samples: int, seed: int, chunk: int):
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = D.shape[0]
    cdf = np.cumsum(D, axis=1)
    cdf[:, -1] = np.inf
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        u = rng.random((m, n))
        yield np.sum(u[:, :, None] >= cdf[None, :, :], axis=2)
        done += m


def sample_weights(D, samples: int, seed: int, chunk: int = 8192) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo expected weights and their standard errors.

    One seeded stream; each sampled profile draws its rows in agent order.
    """
    D = as_matrix(D)
    n = D.shape[0]
    total = np.zeros(n)
    total_sq = np.zeros(n)
    for d in _sample_profiles(D, samples, seed, chunk):
        w = _batch_weights(d)
        total += w.sum(axis=0)
        total_sq += (w * w).sum(axis=0)
    mean = total / samples
    var = np.maximum(total_sq / samples - mean * mean, 0.0)
    se = np.sqrt(var / max(samples - 1, 1))
    return mean, se


def expected_weights(D, method: str = "exact", samples: int = 100_000, seed: int = 0,
                     cap: int = DEFAULT_CAP) -> np.ndarray:
    """Expected weight of every agent under the probabilistic reading of D.

    ``exact`` enumerates support profiles (guarded by ``cap``), ``paths``
    sums over self-avoiding delegation chains, ``sample`` averages ``samples``
    seeded draws.  Agents that are never gurus get weight 0.
    """
    D = as_matrix(D)
    if method == "exact":
        w = np.zeros(D.shape[0])
        for d, prob in _support_batches(D, cap):
            w += prob @ _batch_weights(d)
        return w
    if method == "paths":
        return guru_distribution(D, cap).sum(axis=0)
    if method == "sample":
        return sample_weights(D, samples, seed)[0]
    raise ValueError(f"unknown method {method!r}")


MAX_BATCH_N = 7


def _chains(n: int) -> list[np.ndarray]:
    """All self-avoiding chains on n agents, grouped by number of hops."""
    by_len = [[(s,) for s in range(n)]]
    while len(by_len) < n:
        by_len.append([c + (u,) for c in by_len[-1] for u in range(n) if u not in c])
    return [np.array(c, dtype=np.int64) for c in by_len]


def batch_expected_weights(Ds, chunk: int = 256) -> np.ndarray:
    """Expected weights for a stack of B matrices of size n <= MAX_BATCH_N.

    Same chain sum as ``method="paths"``, evaluated for every matrix at once.
    """
    Ds = np.asarray(Ds, dtype=float)
    if Ds.ndim != 3 or Ds.shape[1] != Ds.shape[2]:
        raise InvalidInstance(f"expected a B x n x n stack, got shape {Ds.shape}")
    n = Ds.shape[1]
    if n > MAX_BATCH_N:
        raise InstanceTooLarge(n, MAX_BATCH_N)
    for D in Ds:
        WeightedProfile(D)
    chains = _chains(n)
    ends = [np.eye(n)[c[:, -1]] for c in chains]
    out = np.empty((Ds.shape[0], n))
    for start in range(0, Ds.shape[0], chunk):
        M = Ds[start:start + chunk]
        diag = np.diagonal(M, axis1=1, axis2=2)
        w = np.zeros((M.shape[0], n))
        for c, onehot in zip(chains, ends):
            p = diag[:, c[:, -1]]
            for t in range(c.shape[1] - 1):
                p = p * M[:, c[:, t], c[:, t + 1]]
            w += p @ onehot
        out[start:start + M.shape[0]] = w
    return out


# ---------------------------------------------------------------------------
# graph view


def delegation_graph(D) -> nx.DiGraph:
    """Edges i -> j for every D[i][j] > 0 with i != j."""
    D = as_matrix(D)
    G = nx.DiGraph()
    G.add_nodes_from(range(D.shape[0]))
    for i, j in zip(*np.nonzero(D)):
        if i != j:
            G.add_edge(int(i), int(j), weight=float(D[i, j]))
    return G


def is_acyclic(D) -> bool:
    return nx.is_directed_acyclic_graph(delegation_graph(D))


def is_one_hop(D) -> bool:
    """True when every delegation lands on an agent that delegates nothing."""
    G = delegation_graph(D)
    return all(G.out_degree(j) == 0 for _, j in G.edges)

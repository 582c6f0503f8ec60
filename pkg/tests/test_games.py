import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import EX_Q, GAME_U, accuracy_values, random_profile
from liquidweights.accuracy import profile_accuracy
from liquidweights.errors import InstanceTooLarge
from liquidweights.games import (
    best_pure_ne_accuracy,
    best_response,
    best_response_dynamics,
    check_lemma1,
    construct_max_accuracy_NE,
    deviation_utility,
    gd_utilities,
    is_U_NE,
    price_of_anarchy,
    price_of_anarchy_pure,
    pure_equilibria,
    single_guru_NE,
    utilities_U,
    utility_U,
)
from liquidweights.model import Network, WeightedProfile, expected_weights, is_acyclic

(x11, x12), (x21, x22) = GAME_U


class TestUtility:
    @pytest.mark.parametrize("y22", [0.0, 0.3, 1.0])
    def test_delegating_to_mixer(self, y22):
        D = [[0, 1], [1 - y22, y22]]
        assert utility_U(D, GAME_U, 0) == pytest.approx(y22 * x12)

    def test_identity(self):
        assert utilities_U(np.eye(2), GAME_U)[0] == pytest.approx([x11, x22])

    def test_cycle(self):
        assert utilities_U([[0, 1], [1, 0]], GAME_U)[0].tolist() == [0, 0]

    @pytest.mark.parametrize("seed", range(5))
    def test_methods_match_enumeration_oracle(self, seed):
        rng = np.random.default_rng(seed)
        D = random_profile(rng, 5)
        u = rng.random((5, 5))
        ref = oracles.mixing_utilities(D, u)
        assert utilities_U(D, u)[0] == pytest.approx(ref, abs=1e-12)
        assert utilities_U(D, u, method="enumerate")[0] == pytest.approx(ref, abs=1e-12)
        est = utilities_U(D, u, method="sample", samples=50_000, seed=seed)[0]
        assert est == pytest.approx(ref, abs=0.02)

    def test_sample_fallback(self):
        D = np.full((6, 6), 1 / 6)
        u = gd_utilities([0.6] * 6)
        vals, method = utilities_U(D, u, cap=50, sample_fallback=True, samples=2000)
        assert method == "sample" and vals.shape == (6,)

    @given(st.integers(0, 2**32 - 1), st.floats(0, 1))
    def test_affine_in_own_row(self, seed, t):
        rng = np.random.default_rng(seed)
        n = 4
        D = random_profile(rng, n)
        u = rng.random((n, n))
        a, b = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        mix = t * a + (1 - t) * b
        lhs = deviation_utility(D, u, 0, mix)
        rhs = t * deviation_utility(D, u, 0, a) + (1 - t) * deviation_utility(D, u, 0, b)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestBestResponse:
    def test_prefers_delegating_to_self_voter(self):
        assert best_response(np.eye(2), GAME_U, 0)[0] == 1

    @pytest.mark.parametrize("y22", [0.1, 0.5, 0.66, 0.67, 0.9])
    def test_threshold_against_dense_grid(self, y22):
        D = [[1, 0], [1 - y22, y22]]
        j, v = best_response(D, GAME_U, 0)
        assert v == pytest.approx(oracles.grid_best_value(D, GAME_U, 0), abs=1e-12)
        assert j == (0 if y22 < x11 / x12 else 1)

    def test_gd_everyone_reaches_top(self):
        q = [0.9, 0.6, 0.6]
        D = [[1, 0, 0], [1, 0, 0], [0, 1, 0]]
        for i in (1, 2):
            assert best_response(D, gd_utilities(q), i)[1] == pytest.approx(0.9)

    def test_network_restricts(self):
        net = Network(3, frozenset({(2, 1)}))
        assert best_response(np.eye(3), gd_utilities([0.9, 0.7, 0.6]), 2, net)[0] == 1


class TestEquilibria:
    def test_example_matrices(self):
        mixed = [[x22 / x21, 1 - x22 / x21], [1 - x11 / x12, x11 / x12]]
        for D in ([[1, 0], [1, 0]], mixed, [[0, 1], [0, 1]]):
            assert is_U_NE(D, GAME_U).is_equilibrium

    def test_cycle_is_not(self):
        out = is_U_NE([[0, 1], [1, 0]], GAME_U)
        assert not out.is_equilibrium and out.max_gain > 0

    def test_identity_with_distinct_accuracies(self):
        out = is_U_NE(np.eye(3), gd_utilities([0.9, 0.7, 0.6]))
        assert not out.is_equilibrium and out.violation[1] == 0

    def test_dynamics_to_top_agent(self):
        res = best_response_dynamics(np.eye(3), gd_utilities([0.9, 0.6, 0.6]))
        assert res.converged and res.outcome.is_equilibrium
        assert res.outcome.utilities == pytest.approx([0.9] * 3)
        assert expected_weights(res.outcome.profile).tolist() == [3, 0, 0]

    def test_dynamics_trivial_cases(self):
        res = best_response_dynamics(np.eye(1), gd_utilities([0.7]))
        assert res.converged and res.rounds == 1 and not res.trace
        res = best_response_dynamics(np.eye(3), gd_utilities([0.7] * 3))
        assert not res.trace and np.array_equal(res.outcome.profile.D, np.eye(3))

    def test_random_order_is_seeded(self):
        u = gd_utilities([0.6, 0.8, 0.7, 0.8])
        a = best_response_dynamics(np.eye(4), u, order="random", seed=4)
        b = best_response_dynamics(np.eye(4), u, order="random", seed=4)
        assert a.trace == b.trace

    def test_max_accuracy_construction(self):
        D = construct_max_accuracy_NE([0.9, 0.9, 0.6])
        assert expected_weights(D) == pytest.approx([1.5, 1.5, 0])
        assert is_U_NE(D, gd_utilities([0.9, 0.9, 0.6])).is_equilibrium
        D = construct_max_accuracy_NE([0.7, 0.9, 0.6])
        assert expected_weights(D).tolist() == [0, 3, 0]

    def test_max_accuracy_beats_pure_equilibria(self):
        q = [0.6] * 5 + [0.55] * 2
        D = construct_max_accuracy_NE(q)
        assert expected_weights(D)[:5] == pytest.approx([7 / 5] * 5)
        assert is_U_NE(D, gd_utilities(q)).is_equilibrium
        value, witness = best_pure_ne_accuracy(q)
        assert profile_accuracy(q, D).value > value
        assert is_U_NE(WeightedProfile.from_pure(witness), gd_utilities(q)).is_equilibrium

    def test_single_guru(self):
        D = single_guru_NE([0.7, 0.9, 0.9])
        assert expected_weights(D).tolist() == [0, 3, 0]


class TestPureEquilibria:
    @pytest.mark.parametrize("seed", range(4))
    def test_against_pointwise_check(self, seed):
        rng = np.random.default_rng(seed)
        n = 3
        u = rng.random((n, n))
        found = {tuple(d) for d in pure_equilibria(u)}
        import itertools

        for d in itertools.product(range(n), repeat=n):
            eq = is_U_NE(WeightedProfile.from_pure(d), u).is_equilibrium
            assert eq == (d in found)

    def test_network(self):
        net = Network(3, frozenset({(1, 0), (2, 1)}))
        eqs = pure_equilibria(gd_utilities([0.9, 0.7, 0.6]), net)
        assert [tuple(d) for d in eqs] == [(0, 0, 1)]

    def test_guard(self):
        with pytest.raises(InstanceTooLarge):
            pure_equilibria(np.zeros((8, 8)))


class TestPriceOfAnarchy:
    def test_example(self):
        p = price_of_anarchy(EX_Q)
        assert p.optimum == pytest.approx(0.92664, abs=1e-5)
        assert p.poa == pytest.approx(0.92664 / 0.9, abs=1e-5)
        assert price_of_anarchy_pure(EX_Q).poa == pytest.approx(0.918 / 0.9)

    def test_single_agent(self):
        assert price_of_anarchy([0.8]).poa == pytest.approx(1.0)

    def test_trend(self):
        vals = [price_of_anarchy([0.6] * n).poa for n in (5, 25, 101)]
        assert vals[0] < vals[1] < vals[2] < 1 / 0.6
        assert vals[2] * 0.6 == pytest.approx(float(oracles.majority_exact(101, 0.6)), abs=1e-12)

    @given(st.lists(accuracy_values, min_size=1, max_size=5).filter(lambda q: max(q) > 0.501))
    def test_weighted_at_least_pure(self, q):
        assert price_of_anarchy(q).poa >= price_of_anarchy_pure(q).poa - 1e-9


class TestAcyclicEquilibria:
    def test_cycle_vacuous(self):
        v = check_lemma1([[0, 1], [1, 0]], gd_utilities([0.7, 0.8]))
        assert v.holds and not v.is_equilibrium and not v.acyclic

    def test_construction(self):
        v = check_lemma1(construct_max_accuracy_NE([0.9, 0.9, 0.6]), gd_utilities([0.9, 0.9, 0.6]))
        assert v.holds and v.is_equilibrium and v.acyclic

    def test_needs_gd(self):
        with pytest.raises(ValueError):
            check_lemma1(np.eye(2), GAME_U)

    @given(st.integers(0, 2**32 - 1))
    def test_dynamics_equilibria_acyclic(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        q = rng.uniform(0.5, 0.95, n)
        edges = {(i, j) for i in range(n) for j in range(n) if rng.random() < 0.6}
        net = Network(n, frozenset(edges))
        start = [int(rng.choice(net.neighbours(i))) for i in range(n)]
        res = best_response_dynamics(WeightedProfile.from_pure(start), gd_utilities(q), net)
        if res.outcome.is_equilibrium:
            assert is_acyclic(res.outcome.profile)

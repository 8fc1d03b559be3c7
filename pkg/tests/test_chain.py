"""Core chain objects: stationary laws, adjoints, semigroups, perturbation."""

import math

import numpy as np
import pytest

from curvlab.chain import (
    Generator,
    ProbabilityVector,
    StateSpace,
    StochasticMatrix,
    adjoint,
    adjoint_generator,
    perturb,
    semigroup_at,
    stationary_distribution,
)
from curvlab.errors import (
    BadEpsilonError,
    NonFiniteTimeError,
    NotIrreducibleError,
    StationaryMismatchError,
)
from curvlab.metric import trivial_metric, GeneratingSet
from curvlab.transport import ollivier_curvature

from conftest import random_chain, random_metric


def chain(rows):
    rows = np.asarray(rows, dtype=float)
    return StochasticMatrix(StateSpace.of_size(rows.shape[0]), rows)


class TestStationary:
    def test_symmetric_two_state(self):
        pi = stationary_distribution(chain([[0.5, 0.5], [0.5, 0.5]]))
        assert np.allclose(pi.weights, [0.5, 0.5], atol=1e-12)

    def test_lazy_symmetric(self):
        pi = stationary_distribution(chain([[0.75, 0.25], [0.25, 0.75]]))
        assert np.allclose(pi.weights, [0.5, 0.5], atol=1e-12)

    def test_biased_two_state_against_substitution_oracle(self):
        # pi = (q, p) / (p + q) for P = [[1-p, p], [q, 1-q]]
        P = chain([[0.9, 0.1], [0.3, 0.7]])
        pi = stationary_distribution(P)
        assert np.allclose(pi.weights, [0.75, 0.25], atol=1e-12)
        # direct substitution oracle
        assert np.max(np.abs(pi.weights @ P.entries - pi.weights)) < 1e-12

    def test_rejects_reducible(self):
        with pytest.raises(NotIrreducibleError):
            stationary_distribution(chain(np.eye(3)))

    def test_random_chains_fixed_point(self, rng):
        for _ in range(25):
            P = random_chain(rng, int(rng.integers(2, 9)))
            pi = stationary_distribution(P)
            assert np.max(np.abs(pi.weights @ P.entries - pi.weights)) < 1e-10
            assert np.all(pi.weights > 0)


class TestConstruction:
    def test_row_sum_rejection(self):
        with pytest.raises(ValueError):
            chain([[0.5, 0.4], [0.5, 0.5]])

    def test_row_sum_repair(self):
        P = chain([[0.5 + 2e-10, 0.5], [0.5, 0.5]])
        assert np.allclose(P.entries.sum(axis=1), 1.0, atol=1e-15)

    def test_negative_entry_rejected(self):
        with pytest.raises(ValueError):
            chain([[1.1, -0.1], [0.5, 0.5]])

    def test_generator_row_sums(self):
        with pytest.raises(ValueError):
            Generator(StateSpace.of_size(2), [[-1.0, 0.9], [1.0, -1.0]])


class TestAdjoint:
    def test_reversible_fixed(self):
        P = chain([[0.75, 0.25], [0.25, 0.75]])
        pi = stationary_distribution(P)
        assert np.allclose(adjoint(P, pi).entries, P.entries, atol=1e-12)

    def test_cycle_transposes(self):
        P = chain([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
        pi = stationary_distribution(P)
        assert np.allclose(adjoint(P, pi).entries, P.entries.T, atol=1e-12)

    def test_biased_two_state_is_reversible(self):
        # detailed-balance oracle: pi(x) P(x,y) symmetric here, so P* = P
        P = chain([[0.9, 0.1], [0.3, 0.7]])
        pi = ProbabilityVector(P.space, [0.75, 0.25])
        flux = pi.weights[:, None] * P.entries
        assert np.allclose(flux, flux.T, atol=1e-15)
        assert np.allclose(adjoint(P, pi).entries, P.entries, atol=1e-12)

    def test_mismatched_pi_rejected(self):
        P = chain([[0.9, 0.1], [0.3, 0.7]])
        with pytest.raises(StationaryMismatchError):
            adjoint(P, ProbabilityVector(P.space, [0.5, 0.5]))

    def test_involution(self, rng):
        for _ in range(20):
            P = random_chain(rng, int(rng.integers(2, 9)))
            pi = stationary_distribution(P)
            PS = adjoint(P, pi)
            assert np.max(np.abs(adjoint(PS, pi).entries - P.entries)) < 1e-10

    def test_inner_product_identity(self, rng):
        # <Pf, g>_pi = <f, P*g>_pi on a basis
        P = random_chain(rng, 5)
        pi = stationary_distribution(P)
        PS = adjoint(P, pi)
        w = pi.weights
        for i in range(5):
            for j in range(5):
                f = np.eye(5)[i]
                g = np.eye(5)[j]
                lhs = np.sum(w * (P.entries @ f) * g)
                rhs = np.sum(w * f * (PS.entries @ g))
                assert abs(lhs - rhs) < 1e-12


class TestSemigroup:
    def test_identity_at_zero(self, rng):
        L = Generator(StateSpace.of_size(3), [[-1, 1, 0], [0, -2, 2], [3, 0, -3]])
        assert np.allclose(semigroup_at(L, 0.0).entries, np.eye(3), atol=1e-15)

    def test_rank_one_closed_form(self):
        # L = P - I with all rows pi: P_t = (1-e^{-t}) Pi + e^{-t} I
        pi = np.array([0.2, 0.5, 0.3])
        P = np.tile(pi, (3, 1))
        L = Generator(StateSpace.of_size(3), P - np.eye(3))
        for t in [0.3, 1.0, 4.2]:
            expect = (1 - math.exp(-t)) * P + math.exp(-t) * np.eye(3)
            assert np.max(np.abs(semigroup_at(L, t).entries - expect)) < 1e-12

    def test_two_state_closed_form(self):
        a, b = 1.3, 0.4
        L = Generator(StateSpace.of_size(2), [[-a, a], [b, -b]])
        for t in [0.1, 1.0, 3.7]:
            e = math.exp(-(a + b) * t)
            expect = (
                np.array([[b, a], [b, a]]) + e * np.array([[a, -a], [-b, b]])
            ) / (a + b)
            assert np.max(np.abs(semigroup_at(L, t).entries - expect)) < 1e-12

    def test_chapman_kolmogorov(self, rng):
        from conftest import random_generator

        for _ in range(10):
            L = random_generator(rng, int(rng.integers(2, 7)), scale=2.0)
            s, t = rng.uniform(0.1, 2.0, size=2)
            lhs = semigroup_at(L, s + t).entries
            rhs = semigroup_at(L, s).entries @ semigroup_at(L, t).entries
            assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_adjoint_commutes_with_semigroup(self, rng):
        # (e^{tL})* = e^{tL*} with L* built from the stationary law
        from conftest import random_generator
        from curvlab.chain import generator_stationary

        for _ in range(10):
            L = random_generator(rng, int(rng.integers(2, 6)))
            pi = generator_stationary(L)
            Lstar = adjoint_generator(L, pi)
            t = float(rng.uniform(0.1, 2.0))
            lhs = adjoint(semigroup_at(L, t), pi).entries
            rhs = semigroup_at(Lstar, t).entries
            assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_large_time_split(self):
        pi = np.array([0.5, 0.5])
        L = Generator(StateSpace.of_size(2), 500.0 * (np.tile(pi, (2, 1)) - np.eye(2)))
        Pt = semigroup_at(L, 2.0)  # rate * t = 1000, forces splitting
        assert np.allclose(Pt.entries, np.tile(pi, (2, 1)), atol=1e-12)

    def test_rejects_bad_time(self):
        L = Generator(StateSpace.of_size(2), [[-1, 1], [1, -1]])
        for bad in [float("nan"), float("inf"), -0.5]:
            with pytest.raises(NonFiniteTimeError):
                semigroup_at(L, bad)


class TestPerturb:
    def test_direct_formula(self):
        P = StochasticMatrix(StateSpace.of_size(2), np.eye(2))
        pi = ProbabilityVector(P.space, [0.5, 0.5])
        Q = perturb(P, pi, 0.5)
        assert np.allclose(Q.entries, [[0.75, 0.25], [0.25, 0.75]], atol=1e-15)

    def test_small_epsilon_limit(self, rng):
        P = random_chain(rng, 4)
        pi = stationary_distribution(P)
        for eps in [1e-3, 1e-6]:
            Q = perturb(P, pi, eps)
            assert np.max(np.abs(Q.entries - P.entries)) < eps * 1.01

    def test_preserves_stationary(self, rng):
        P = random_chain(rng, 5)
        pi = stationary_distribution(P)
        Q = perturb(P, pi, 0.3)
        assert np.allclose(
            stationary_distribution(Q).weights, pi.weights, atol=1e-10
        )
        assert np.all(Q.entries > 0)

    def test_bad_epsilon(self):
        P = StochasticMatrix(StateSpace.of_size(2), np.eye(2))
        pi = ProbabilityVector(P.space, [0.5, 0.5])
        for eps in [0.0, 1.0, -0.2, float("nan")]:
            with pytest.raises(BadEpsilonError):
                perturb(P, pi, eps)

    def test_never_decreases_curvature(self, rng):
        # mixing toward pi can only help the contraction constant
        for _ in range(8):
            P = random_chain(rng, int(rng.integers(2, 6)))
            pi = stationary_distribution(P)
            d, S = random_metric(rng, P.space)
            base = ollivier_curvature(P, d, S).kappa
            for eps in (0.1, 0.5):
                k = ollivier_curvature(perturb(P, pi, eps), d, S).kappa
                assert k >= base - 1e-9


class TestUniformizationOracle:
    def test_matches_scipy_expm(self, rng):
        # independent route: Pade-based matrix exponential
        from scipy.linalg import expm
        from conftest import random_generator

        for _ in range(20):
            n = int(rng.integers(2, 8))
            L = random_generator(rng, n, scale=float(rng.uniform(0.2, 4.0)))
            t = float(rng.uniform(0.0, 5.0))
            ours = semigroup_at(L, t).entries
            ref = expm(t * L.rates)
            assert np.max(np.abs(ours - ref)) < 1e-11

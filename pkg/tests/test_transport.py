"""Wasserstein solver, curvature reports, sectional certificates, Lipschitz."""

import itertools

import numpy as np
import pytest

from curvlab.chain import (
    ProbabilityVector,
    StateSpace,
    StochasticMatrix,
    adjoint,
    stationary_distribution,
)
from curvlab.errors import EmptyGeneratingSetError
from curvlab.metric import GeneratingSet, MetricSpace, trivial_metric
from curvlab.transport import (
    lipschitz,
    ollivier_curvature,
    sectional_feasible,
    wasserstein,
)

from conftest import random_chain, random_metric, random_probability


def tv(mu, nu):
    """Total-variation oracle: sum of positive parts."""
    return float(np.sum(np.clip(mu - nu, 0.0, None)))


def one_lipschitz(rng, d):
    """A random 1-Lipschitz function: inf-convolution of noise with d."""
    g = rng.normal(size=d.size)
    return np.min(g[None, :] + d.dist, axis=1)


class TestWasserstein:
    def test_equal_measures_zero_and_diagonal_plan(self, rng):
        sp = StateSpace.of_size(4)
        d, _ = random_metric(rng, sp)
        mu = random_probability(rng, sp)
        val, plan = wasserstein(mu, mu, d)
        assert abs(val) < 1e-12
        off = plan.joint - np.diag(np.diag(plan.joint))
        assert np.max(np.abs(off)) < 1e-12

    def test_dirac_pair_gives_distance(self, rng):
        sp = StateSpace.of_size(5)
        d, _ = random_metric(rng, sp)
        mu = ProbabilityVector.dirac(sp, "1")
        nu = ProbabilityVector.dirac(sp, "4")
        val, plan = wasserstein(mu, nu, d)
        assert abs(val - d.dist[1, 4]) < 1e-12
        assert abs(plan.joint[1, 4] - 1.0) < 1e-12

    def test_trivial_metric_is_total_variation(self):
        sp = StateSpace.of_size(2)
        mu = ProbabilityVector(sp, [0.7, 0.3])
        nu = ProbabilityVector(sp, [0.4, 0.6])
        val, _ = wasserstein(mu, nu, trivial_metric(sp))
        assert abs(val - 0.3) < 1e-12

    def test_trivial_metric_matches_tv_oracle(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 9))
            sp = StateSpace.of_size(n)
            mu = random_probability(rng, sp)
            nu = random_probability(rng, sp)
            val, _ = wasserstein(mu, nu, trivial_metric(sp))
            assert abs(val - tv(mu.weights, nu.weights)) < 1e-10

    def test_kantorovich_dual_lower_bound(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 8))
            sp = StateSpace.of_size(n)
            d, _ = random_metric(rng, sp)
            mu = random_probability(rng, sp)
            nu = random_probability(rng, sp)
            val, _ = wasserstein(mu, nu, d)
            for _ in range(5):
                f = one_lipschitz(rng, d)
                assert float(f @ (mu.weights - nu.weights)) <= val + 1e-9

    def test_plan_marginals(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 8))
            sp = StateSpace.of_size(n)
            d, _ = random_metric(rng, sp)
            mu = random_probability(rng, sp)
            nu = random_probability(rng, sp)
            _, plan = wasserstein(mu, nu, d)
            assert np.max(np.abs(plan.joint.sum(axis=1) - mu.weights)) < 1e-10
            assert np.max(np.abs(plan.joint.sum(axis=0) - nu.weights)) < 1e-10

    def test_sparse_support_measures(self, rng):
        sp = StateSpace.of_size(6)
        d, _ = random_metric(rng, sp)
        mu = ProbabilityVector(sp, [0.5, 0.5, 0, 0, 0, 0])
        nu = ProbabilityVector(sp, [0, 0, 0, 0, 0.25, 0.75])
        val, plan = wasserstein(mu, nu, d)
        brute = min(  # enumerate vertex couplings of two-point marginals
            0.5 * d.dist[0, a] + 0.5 * d.dist[1, b] + x * d.dist[0, 4]
            for a, b, x in [(4, 5, 0)]
        )
        # independent check by LP enumeration over the 2x2 polytope corner
        # structure: coupling = [[x, .5-x], [.25-x, .25+x]] for x in [0,.25]
        xs = np.linspace(0, 0.25, 2001)
        costs = (
            xs * d.dist[0, 4]
            + (0.5 - xs) * d.dist[0, 5]
            + (0.25 - xs) * d.dist[1, 4]
            + (0.25 + xs) * d.dist[1, 5]
        )
        assert val <= costs.min() + 1e-9
        assert abs(val - costs.min()) < 1e-6

    def test_triangle_inequality(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 7))
            sp = StateSpace.of_size(n)
            d, _ = random_metric(rng, sp)
            mu, nu, rho = (random_probability(rng, sp) for _ in range(3))
            w_mn, _ = wasserstein(mu, nu, d)
            w_nr, _ = wasserstein(nu, rho, d)
            w_mr, _ = wasserstein(mu, rho, d)
            assert w_mr <= w_mn + w_nr + 1e-9


def brute_curvature(P, d):
    """Definitional oracle over all state pairs."""
    worst = 0.0
    for x, y in itertools.combinations(range(P.size), 2):
        mu = ProbabilityVector(P.space, P.entries[x])
        nu = ProbabilityVector(P.space, P.entries[y])
        val, _ = wasserstein(mu, nu, d)
        worst = max(worst, val / d.dist[x, y])
    return 1.0 - worst


class TestOllivierCurvature:
    def test_rank_one_fully_contracts(self, rng):
        sp = StateSpace.of_size(4)
        pi = rng.dirichlet(np.ones(4))
        P = StochasticMatrix(sp, np.tile(pi, (4, 1)))
        d, S = random_metric(rng, sp)
        assert abs(ollivier_curvature(P, d, S).kappa - 1.0) < 1e-12

    def test_two_state_lazy(self):
        sp = StateSpace.of_size(2)
        P = StochasticMatrix(sp, [[0.75, 0.25], [0.25, 0.75]])
        rep = ollivier_curvature(P, trivial_metric(sp), GeneratingSet.all_pairs(sp))
        assert abs(rep.kappa - 0.5) < 1e-12

    def test_identity_is_flat(self, rng):
        sp = StateSpace.of_size(3)
        P = StochasticMatrix(sp, np.eye(3))
        d, S = random_metric(rng, sp)
        assert abs(ollivier_curvature(P, d, S).kappa) < 1e-12

    def test_negative_curvature_not_clamped(self):
        # a flip chain doubles the distance of nearby points on a path metric
        sp = StateSpace.of_size(3)
        P = StochasticMatrix(sp, [[0, 0, 1], [0, 0, 1], [0.5, 0.5, 0]])
        D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
        d = MetricSpace(sp, D)
        rep = ollivier_curvature(P, d, GeneratingSet.all_pairs(sp))
        assert rep.kappa < 0

    def test_generating_set_matches_all_pairs(self, rng):
        for _ in range(12):
            n = int(rng.integers(3, 7))
            P = random_chain(rng, n)
            d, S = random_metric(rng, P.space)
            k_gen = ollivier_curvature(P, d, S).kappa
            k_all = ollivier_curvature(P, d, GeneratingSet.all_pairs(P.space)).kappa
            assert abs(k_gen - k_all) < 1e-9

    def test_report_invariants(self, rng):
        P = random_chain(rng, 5)
        d, S = random_metric(rng, P.space)
        rep = ollivier_curvature(P, d, S)
        factors = [rec[2] for rec in rep.per_pair]
        assert all(f >= 0 for f in factors)
        assert abs(rep.kappa - (1.0 - max(factors))) < 1e-15

    def test_empty_generating_set(self, rng):
        P = random_chain(rng, 3)
        d, _ = random_metric(rng, P.space)
        with pytest.raises(EmptyGeneratingSetError):
            ollivier_curvature(P, d, GeneratingSet(P.space, []))

    def test_lipschitz_dual_bound(self, rng):
        # Lip(Pf) <= (1 - kappa) Lip(f)
        for _ in range(20):
            n = int(rng.integers(2, 7))
            P = random_chain(rng, n)
            d, S = random_metric(rng, P.space)
            kappa = ollivier_curvature(P, d, GeneratingSet.all_pairs(P.space)).kappa
            f = rng.normal(size=n)
            assert lipschitz(P.entries @ f, d) <= (1 - kappa) * lipschitz(f, d) + 1e-9


class TestSectional:
    def test_rank_one_always_feasible(self, rng):
        sp = StateSpace.of_size(4)
        pi = rng.dirichlet(np.ones(4))
        P = StochasticMatrix(sp, np.tile(pi, (4, 1)))
        d, S = random_metric(rng, sp)
        cert = sectional_feasible(P, d, S)
        assert cert.holds and len(cert.witnesses) == len(S)

    def test_identity_feasible(self, rng):
        sp = StateSpace.of_size(4)
        P = StochasticMatrix(sp, np.eye(4))
        d, S = random_metric(rng, sp)
        assert sectional_feasible(P, d, S).holds

    def test_two_state_trivial_always_feasible(self, rng):
        sp = StateSpace.of_size(2)
        for _ in range(10):
            P = random_chain(rng, 2)
            cert = sectional_feasible(
                P, trivial_metric(sp), GeneratingSet.all_pairs(sp)
            )
            assert cert.holds

    def test_witness_support_and_marginals(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 6))
            P = random_chain(rng, n)
            pi = stationary_distribution(P)
            PS = adjoint(P, pi)
            d = trivial_metric(P.space)
            S = GeneratingSet.all_pairs(P.space)
            cert = sectional_feasible(PS, d, S)
            assert cert.holds
            for (x, y), coup in cert.witnesses.items():
                i, j = P.space.index(x), P.space.index(y)
                bad = d.dist > d.dist[i, j] + 1e-12
                assert np.max(coup.joint[bad], initial=0.0) == 0.0
                assert np.max(np.abs(coup.joint.sum(axis=1) - PS.entries[i])) < 1e-10
                assert np.max(np.abs(coup.joint.sum(axis=0) - PS.entries[j])) < 1e-10

    def test_infeasible_case_detected(self):
        # deterministic swap moves mass across a long distance: no coupling of
        # the rows of P* can stay within distance 1 of the start pair
        sp = StateSpace.of_size(3)
        D = np.array([[0, 1, 10], [1, 0, 10], [10, 10, 0]], dtype=float)
        d = MetricSpace(sp, D)
        P = StochasticMatrix(sp, [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
        S = GeneratingSet(sp, [("0", "1")])
        cert = sectional_feasible(P, d, S)
        assert not cert.holds
        assert cert.failing_pair == ("0", "1")

    def test_log_lipschitz_dual_bound(self, rng):
        # Lip(log P* f) <= Lip(log f) whenever the certificate holds
        for _ in range(20):
            n = int(rng.integers(2, 6))
            P = random_chain(rng, n)
            pi = stationary_distribution(P)
            PS = adjoint(P, pi)
            d, S = random_metric(rng, P.space)
            if not sectional_feasible(PS, d, S).holds:
                continue
            f = np.exp(rng.normal(size=n))
            lhs = lipschitz(np.log(PS.entries @ f), d)
            rhs = lipschitz(np.log(f), d)
            assert lhs <= rhs + 1e-9


class TestLipschitz:
    def test_constant_function(self, rng):
        d, _ = random_metric(rng, StateSpace.of_size(4))
        assert lipschitz(np.full(4, 3.7), d) == 0.0

    def test_distance_to_point_has_unit_constant(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 8))
            d, _ = random_metric(rng, StateSpace.of_size(n))
            f = d.dist[0]
            assert abs(lipschitz(f, d) - 1.0) < 1e-12

    def test_indicator_on_trivial_metric(self):
        d = trivial_metric(StateSpace.of_size(2))
        assert abs(lipschitz(np.array([0.0, 1.0]), d) - 1.0) < 1e-15


class TestSimplexAgainstLPOracle:
    """Independent cross-check of the transportation simplex: scipy's HiGHS
    solver on the same LP, including degeneracy-heavy tied instances."""

    def lp_value(self, a, b, C):
        from scipy.optimize import linprog

        m, n = C.shape
        A_eq = []
        for i in range(m):
            row = np.zeros(m * n)
            row[i * n : (i + 1) * n] = 1.0
            A_eq.append(row)
        for j in range(n):
            row = np.zeros(m * n)
            row[j::n] = 1.0
            A_eq.append(row)
        res = linprog(
            C.ravel(), A_eq=np.array(A_eq), b_eq=np.concatenate([a, b]),
            bounds=(0, None), method="highs",
        )
        assert res.status == 0
        return res.fun

    def test_random_instances(self, rng):
        from curvlab.transport import _transport_simplex, _verify_optimal

        for _ in range(60):
            m = int(rng.integers(1, 9))
            n = int(rng.integers(1, 9))
            a = rng.dirichlet(np.ones(m))
            b = rng.dirichlet(np.ones(n))
            C = rng.uniform(0.0, 3.0, size=(m, n))
            X, u, v = _transport_simplex(a, b, C)
            _verify_optimal(X, u, v, C, a, b)
            assert abs(float((X * C).sum()) - self.lp_value(a, b, C)) < 1e-9

    def test_degenerate_ties(self, rng):
        # equal masses everywhere force many zero-flow pivots
        from curvlab.transport import _transport_simplex, _verify_optimal

        for k in (2, 4, 8):
            a = np.full(k, 1.0 / k)
            b = np.full(k, 1.0 / k)
            for _ in range(10):
                C = np.round(rng.uniform(0, 2, size=(k, k)), 1)  # tied costs
                X, u, v = _transport_simplex(a, b, C)
                _verify_optimal(X, u, v, C, a, b)
                assert abs(float((X * C).sum()) - self.lp_value(a, b, C)) < 1e-9

    def test_wasserstein_symmetry(self, rng):
        for _ in range(15):
            n = int(rng.integers(2, 7))
            sp = StateSpace.of_size(n)
            d, _ = random_metric(rng, sp)
            mu = random_probability(rng, sp)
            nu = random_probability(rng, sp)
            w1, _ = wasserstein(mu, nu, d)
            w2, _ = wasserstein(nu, mu, d)
            assert abs(w1 - w2) < 1e-10


class TestSectionalAgainstLPOracle:
    def test_feasibility_matches_linprog(self, rng):
        # independent route: decide the coupling polytope by LP feasibility
        from scipy.optimize import linprog
        from curvlab.transport import _feasible_coupling

        agree = disagree = 0
        for _ in range(120):
            n = int(rng.integers(2, 6))
            p = rng.dirichlet(np.ones(n))
            q = rng.dirichlet(np.ones(n))
            if rng.random() < 0.3:  # sparsify marginals sometimes
                p = np.where(rng.random(n) < 0.4, 0.0, p)
                if p.sum() == 0:
                    continue
                p = p / p.sum()
            allowed = rng.random((n, n)) < rng.uniform(0.2, 0.9)
            joint = _feasible_coupling(p, q, allowed)

            A_eq, b_eq = [], []
            for i in range(n):
                row = np.zeros(n * n)
                row[i * n : (i + 1) * n] = 1.0
                A_eq.append(row)
                b_eq.append(p[i])
            for j in range(n):
                row = np.zeros(n * n)
                row[j::n] = 1.0
                A_eq.append(row)
                b_eq.append(q[j])
            ub = np.where(allowed, None, 0.0)
            bounds = [(0.0, ub[i, j]) for i in range(n) for j in range(n)]
            res = linprog(np.zeros(n * n), A_eq=np.array(A_eq), b_eq=b_eq,
                          bounds=bounds, method="highs")
            lp_feasible = res.status == 0
            if (joint is not None) == lp_feasible:
                agree += 1
            else:
                disagree += 1
            if joint is not None:
                bad = ~allowed
                assert np.max(joint[bad], initial=0.0) == 0.0
        assert disagree == 0 and agree > 50

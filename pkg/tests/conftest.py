"""Shared helpers: random chains, generators, and metrics at desk scale."""

import numpy as np
import pytest

from curvlab.chain import Generator, ProbabilityVector, StateSpace, StochasticMatrix
from curvlab.metric import GeneratingSet, closure_from_pairs, trivial_metric


def random_chain(rng, n, min_entry=0.0):
    """A random irreducible row-stochastic matrix on n states."""
    while True:
        P = rng.dirichlet(np.ones(n), size=n)
        if min_entry > 0:
            P = (1 - min_entry * n) * P + min_entry
        # sparsify sometimes to exercise structure, keep irreducibility
        M = StochasticMatrix(StateSpace.of_size(n), P)
        if M.is_irreducible:
            return M


def random_sparse_chain(rng, n, keep=0.6):
    """A random irreducible chain whose support graph has gaps."""
    for _ in range(200):
        mask = rng.random((n, n)) < keep
        np.fill_diagonal(mask, True)
        P = rng.random((n, n)) * mask
        rows = P.sum(axis=1)
        if np.any(rows == 0):
            continue
        M = StochasticMatrix(StateSpace.of_size(n), P / rows[:, None])
        if M.is_irreducible:
            return M
    raise RuntimeError("failed to draw an irreducible sparse chain")


def random_generator(rng, n, scale=1.0):
    """A random irreducible generator."""
    L = rng.random((n, n)) * scale
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return Generator(StateSpace.of_size(n), L)


def random_metric(rng, space):
    """A random connected weighted-graph metric with its generating set."""
    n = space.size
    labels = space.labels
    edges = [(labels[i], labels[i + 1], float(rng.uniform(0.5, 2.0)))
             for i in range(n - 1)]
    extra = rng.integers(0, n)
    for _ in range(extra):
        i, j = rng.choice(n, size=2, replace=False)
        edges.append((labels[i], labels[j], float(rng.uniform(0.5, 2.0))))
    return closure_from_pairs(space, edges)


def random_probability(rng, space):
    return ProbabilityVector(space, rng.dirichlet(np.ones(space.size)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

"""Finite metric spaces, generating pair sets, and metric constructors.

A generating set S is a collection of state pairs whose shortest-path closure
(with edge weights d(x,y)) reproduces the full metric; curvature and coupling
certificates only ever need to be checked on such pairs.
"""

from __future__ import annotations

import numpy as np

from .chain import StateSpace, StochasticMatrix, _freeze
from .errors import (
    DimensionMismatchError,
    NonpositiveWeightError,
    NotConnectedError,
)

METRIC_TOL = 1e-12


def shortest_path_closure(W: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths of a weight matrix (inf = no edge),
    Floyd-Warshall."""
    D = W.copy()
    np.fill_diagonal(D, 0.0)
    n = D.shape[0]
    for k in range(n):
        np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :], out=D)
    return D


class MetricSpace:
    """A metric on a labeled state space, stored as a dense symmetric matrix.

    check_triangle may be disabled by constructors whose output satisfies the
    triangle inequality by construction (shortest-path closures, Hamming,
    transposition, L1 metrics); user-supplied matrices are always checked.
    """

    def __init__(self, space: StateSpace, dist, check_triangle: bool = True):
        D = np.asarray(dist, dtype=float)
        n = space.size
        if D.shape != (n, n):
            raise DimensionMismatchError(f"expected ({n},{n}) matrix, got {D.shape}")
        if np.any(np.abs(np.diag(D)) > 0):
            raise ValueError("distance of a state to itself must be zero")
        if np.max(np.abs(D - D.T)) > METRIC_TOL:
            raise ValueError("distance matrix must be symmetric")
        off = D + np.eye(n)  # mask the diagonal for the positivity check
        if np.any(off <= 0):
            raise ValueError("distinct states must be at positive distance")
        if not np.all(np.isfinite(D)):
            raise NotConnectedError("distance matrix contains non-finite entries")
        if check_triangle:
            for k in range(n):
                if np.any(D > D[:, k : k + 1] + D[k : k + 1, :] + METRIC_TOL):
                    raise ValueError("triangle inequality violated")
        self.space = space
        self.dist = _freeze(D)

    @property
    def size(self) -> int:
        return self.space.size

    def __repr__(self):
        return f"MetricSpace({self.space})"


class GeneratingSet:
    """An (unordered) list of state pairs intended to generate a metric."""

    def __init__(self, space: StateSpace, pairs):
        seen = set()
        out = []
        for x, y in pairs:
            i, j = space.index(x), space.index(y)
            if i == j:
                raise ValueError("generating pairs must join distinct states")
            key = (min(i, j), max(i, j))
            if key not in seen:
                seen.add(key)
                out.append(key)
        self.space = space
        self.pairs = tuple(out)

    @staticmethod
    def all_pairs(space: StateSpace) -> "GeneratingSet":
        n = space.size
        labels = space.labels
        return GeneratingSet(
            space, [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n)]
        )

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __repr__(self):
        return f"GeneratingSet({len(self.pairs)} pairs on {self.space})"


def trivial_metric(space: StateSpace) -> MetricSpace:
    """The 0/1 metric, under which Wasserstein distance is total variation."""
    D = 1.0 - np.eye(space.size)
    return MetricSpace(space, D, check_triangle=False)


def combinatorial_distance(P: StochasticMatrix) -> MetricSpace:
    """Shortest-path distance in the undirected support graph of P
    (x ~ y iff P(x,y) > 0 or P(y,x) > 0), unit edge weights.

    For non-reversible P the one-sided reachability count can be asymmetric
    and is not a metric; only the symmetrized version is exposed.
    """
    n = P.size
    A = (P.entries > 0) | (P.entries.T > 0)
    W = np.where(A, 1.0, np.inf)
    np.fill_diagonal(W, 0.0)
    D = shortest_path_closure(W)
    if not np.all(np.isfinite(D)):
        raise NotConnectedError("support graph of P is not connected")
    return MetricSpace(P.space, D, check_triangle=False)


def closure_from_pairs(
    space: StateSpace, weighted_pairs
) -> tuple[MetricSpace, GeneratingSet]:
    """Metric generated by weighted edges: all-pairs shortest paths over the
    given pairs, returned together with the pairs as its generating set."""
    n = space.size
    W = np.full((n, n), np.inf)
    np.fill_diagonal(W, 0.0)
    pairs = []
    for x, y, w in weighted_pairs:
        if not (w > 0):
            raise NonpositiveWeightError(f"edge weight must be positive, got {w}")
        i, j = space.index(x), space.index(y)
        if i == j:
            raise ValueError("edges must join distinct states")
        W[i, j] = min(W[i, j], w)
        W[j, i] = min(W[j, i], w)
        pairs.append((x, y))
    D = shortest_path_closure(W)
    if not np.all(np.isfinite(D)):
        raise NotConnectedError("weighted pairs do not connect the space")
    return MetricSpace(space, D, check_triangle=False), GeneratingSet(space, pairs)


def verify_generating(d: MetricSpace, S: GeneratingSet) -> bool:
    """True iff shortest paths restricted to the pairs of S, with weights
    d(x,y), reproduce the metric exactly (within 1e-12)."""
    if d.space != S.space:
        raise DimensionMismatchError("metric and generating set disagree on space")
    n = d.size
    W = np.full((n, n), np.inf)
    np.fill_diagonal(W, 0.0)
    for i, j in S.pairs:
        W[i, j] = d.dist[i, j]
        W[j, i] = d.dist[i, j]
    C = shortest_path_closure(W)
    if not np.all(np.isfinite(C)):
        return False
    return bool(np.max(np.abs(C - d.dist)) <= METRIC_TOL)

"""Stochastic matrices, generators, stationary laws, and semigroup evaluation.

All objects are immutable after construction (their numpy buffers are marked
read-only) and all operations are pure, so concurrent read-only use is safe.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csgraph

from .errors import (
    BadEpsilonError,
    DimensionMismatchError,
    NonFiniteTimeError,
    NotIrreducibleError,
    StationaryMismatchError,
)

ROW_SUM_TOL = 1e-12
ROW_SUM_REPAIR_TOL = 1e-9
STATIONARY_TOL = 1e-10
GENERATOR_ROW_TOL = 1e-10
SEMIGROUP_TAIL = 1e-13


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class StateSpace:
    """A labeled finite state space."""

    def __init__(self, labels):
        labels = [str(x) for x in labels]
        if len(labels) == 0:
            raise ValueError("state space must contain at least one state")
        if len(set(labels)) != len(labels):
            raise ValueError("state labels must be pairwise distinct")
        self.labels = tuple(labels)
        self.size = len(labels)
        self._index = {lab: i for i, lab in enumerate(labels)}

    def index(self, label) -> int:
        return self._index[str(label)]

    def __eq__(self, other):
        return isinstance(other, StateSpace) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __len__(self):
        return self.size

    def __repr__(self):
        shown = ",".join(self.labels[:6]) + ("..." if self.size > 6 else "")
        return f"StateSpace({self.size}: {shown})"

    @staticmethod
    def of_size(n: int) -> "StateSpace":
        return StateSpace([str(i) for i in range(n)])


def _require_same_space(a, b):
    if a.space != b.space:
        raise DimensionMismatchError(
            f"operands live on different spaces: {a.space} vs {b.space}"
        )


class ProbabilityVector:
    """A probability distribution on a labeled state space."""

    def __init__(self, space: StateSpace, weights):
        w = np.asarray(weights, dtype=float)
        if w.shape != (space.size,):
            raise DimensionMismatchError(
                f"expected {space.size} weights, got shape {w.shape}"
            )
        if np.any(w < 0):
            raise ValueError("probabilities must be non-negative")
        s = w.sum()
        if abs(s - 1.0) > ROW_SUM_TOL:
            if abs(s - 1.0) < ROW_SUM_REPAIR_TOL:
                w = w / s
            else:
                raise ValueError(f"weights sum to {s}, not 1")
        self.space = space
        self.weights = _freeze(w)

    def __repr__(self):
        return f"ProbabilityVector({np.array2string(self.weights, precision=4)})"

    @staticmethod
    def dirac(space: StateSpace, label) -> "ProbabilityVector":
        w = np.zeros(space.size)
        w[space.index(label)] = 1.0
        return ProbabilityVector(space, w)

    @staticmethod
    def uniform(space: StateSpace) -> "ProbabilityVector":
        return ProbabilityVector(space, np.full(space.size, 1.0 / space.size))


def _strongly_connected(support: np.ndarray) -> bool:
    n_comp, _ = csgraph.connected_components(
        support.astype(np.int8), directed=True, connection="strong"
    )
    return n_comp == 1


class StochasticMatrix:
    """A row-stochastic kernel on a labeled finite state space.

    Rows must sum to 1 within 1e-12; deviations below 1e-9 are renormalized,
    anything worse is rejected (silent repair of bad data would mask bugs in
    model builders).  Irreducibility is decided structurally, from strong
    connectivity of the support graph.
    """

    def __init__(self, space: StateSpace, entries):
        P = np.asarray(entries, dtype=float)
        n = space.size
        if P.shape != (n, n):
            raise DimensionMismatchError(f"expected ({n},{n}) matrix, got {P.shape}")
        if np.any(P < 0):
            raise ValueError("transition probabilities must be non-negative")
        rowsums = P.sum(axis=1)
        dev = np.max(np.abs(rowsums - 1.0))
        if dev > ROW_SUM_TOL:
            if dev < ROW_SUM_REPAIR_TOL:
                P = P / rowsums[:, None]
            else:
                raise ValueError(f"row sums deviate from 1 by {dev:.3e}")
        self.space = space
        self.entries = _freeze(P)
        self.is_irreducible = _strongly_connected(P > 0)
        self._stationary = None

    @property
    def size(self) -> int:
        return self.space.size

    def row(self, x: int) -> np.ndarray:
        return self.entries[x]

    def __matmul__(self, other):
        if isinstance(other, StochasticMatrix):
            _require_same_space(self, other)
            return StochasticMatrix(self.space, self.entries @ other.entries)
        return NotImplemented

    def __repr__(self):
        return f"StochasticMatrix({self.space})"


class Generator:
    """A continuous-time Markov generator: non-negative off-diagonal rates,
    rows summing to zero within 1e-10."""

    def __init__(self, space: StateSpace, rates):
        L = np.asarray(rates, dtype=float)
        n = space.size
        if L.shape != (n, n):
            raise DimensionMismatchError(f"expected ({n},{n}) matrix, got {L.shape}")
        off = L.copy()
        np.fill_diagonal(off, 0.0)
        if np.any(off < 0):
            raise ValueError("off-diagonal rates must be non-negative")
        if np.max(np.abs(L.sum(axis=1))) > GENERATOR_ROW_TOL:
            raise ValueError("generator rows must sum to zero")
        self.space = space
        self.rates = _freeze(L)

    @property
    def size(self) -> int:
        return self.space.size

    @staticmethod
    def from_kernel(P: StochasticMatrix) -> "Generator":
        """The generator P - I of the semigroup embedded in a discrete kernel."""
        return Generator(P.space, P.entries - np.eye(P.size))

    def uniformized(self) -> tuple[float, np.ndarray]:
        """Return (rate, kernel) with rate = max exit rate and
        kernel = I + L/rate row-stochastic.  rate may be 0 for the zero
        generator, in which case the kernel is the identity."""
        lam = float(np.max(-np.diag(self.rates)))
        if lam <= 0.0:
            return 0.0, np.eye(self.size)
        return lam, np.eye(self.size) + self.rates / lam

    def __repr__(self):
        return f"Generator({self.space})"


def stationary_distribution(P: StochasticMatrix) -> ProbabilityVector:
    """The unique invariant law of an irreducible kernel.

    Solved as the dense linear system (P^T - I) pi = 0 plus normalization;
    exactness at small N matters more than scale here.
    """
    if not P.is_irreducible:
        raise NotIrreducibleError("kernel support graph is not strongly connected")
    n = P.size
    A = np.vstack([P.entries.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if np.any(pi <= 0):
        raise NotIrreducibleError("stationary solve produced non-positive mass")
    pi = pi / pi.sum()
    if np.max(np.abs(pi @ P.entries - pi)) > STATIONARY_TOL:
        raise NotIrreducibleError("stationary solve failed to converge")
    return ProbabilityVector(P.space, pi)


def generator_stationary(L: Generator) -> ProbabilityVector:
    """The invariant law of an irreducible generator (pi L = 0)."""
    lam, K = L.uniformized()
    P = StochasticMatrix(L.space, K)
    if lam == 0.0:
        if L.size != 1:
            raise NotIrreducibleError("zero generator on more than one state")
        return ProbabilityVector(L.space, [1.0])
    return stationary_distribution(P)


def adjoint(P: StochasticMatrix, pi: ProbabilityVector) -> StochasticMatrix:
    """Time reversal of P in L^2(pi): P*(x,y) = pi(y) P(y,x) / pi(x)."""
    _require_same_space(P, pi)
    w = pi.weights
    if np.any(w <= 0):
        raise StationaryMismatchError("stationary law must be strictly positive")
    if np.max(np.abs(w @ P.entries - w)) > 1e-9:
        raise StationaryMismatchError("supplied law is not stationary for P")
    Pstar = (P.entries.T * w[None, :]) / w[:, None]
    return StochasticMatrix(P.space, Pstar)


def adjoint_generator(L: Generator, pi: ProbabilityVector) -> Generator:
    """Adjoint generator in L^2(pi): L*(x,y) = pi(y) L(y,x) / pi(x) off the
    diagonal, diagonal fixed by zero row sums."""
    _require_same_space(L, pi)
    w = pi.weights
    if np.max(np.abs(w @ L.rates)) > 1e-8 * max(1.0, np.max(np.abs(L.rates))):
        raise StationaryMismatchError("supplied law is not stationary for L")
    Lstar = (L.rates.T * w[None, :]) / w[:, None]
    np.fill_diagonal(Lstar, 0.0)
    np.fill_diagonal(Lstar, -Lstar.sum(axis=1))
    return Generator(L.space, Lstar)


def _poisson_mixture(K: np.ndarray, lt: float) -> np.ndarray:
    """Sum of Poisson(lt)-weighted powers of K, truncated once the neglected
    Poisson tail is below SEMIGROUP_TAIL."""
    n = K.shape[0]
    w = math.exp(-lt)
    acc = w * np.eye(n)
    power = np.eye(n)
    total = w
    k = 0
    while total < 1.0 - SEMIGROUP_TAIL:
        k += 1
        power = power @ K
        w *= lt / k
        acc += w * power
        total += w
        if k > 100 * (lt + 10):  # defensive; unreachable for finite lt
            raise RuntimeError("uniformization failed to converge")
    return acc


def semigroup_at(L: Generator, t: float) -> StochasticMatrix:
    """Evaluate e^{tL} by uniformization (Poisson mixture of powers of the
    uniformized kernel), which preserves non-negativity bit for bit.

    Large lt is split as (e^{(t/k)L})^k to keep Poisson weights
    representable.
    """
    if not np.isfinite(t):
        raise NonFiniteTimeError(f"time must be finite, got {t}")
    if t < 0:
        raise NonFiniteTimeError("time must be non-negative")
    lam, K = L.uniformized()
    lt = lam * t
    if lt == 0.0:
        return StochasticMatrix(L.space, np.eye(L.size))
    pieces = max(1, int(math.ceil(lt / 350.0)))
    M = _poisson_mixture(K, lt / pieces)
    out = M
    for _ in range(pieces - 1):
        out = out @ M
    return StochasticMatrix(L.space, out)


def perturb(P: StochasticMatrix, pi: ProbabilityVector, eps: float) -> StochasticMatrix:
    """Mix every row of P with the stationary law: (1-eps) P(x,y) + eps pi(y).

    Keeps pi stationary and makes every entry positive.
    """
    _require_same_space(P, pi)
    if not (0.0 < eps < 1.0) or not np.isfinite(eps):
        raise BadEpsilonError(f"epsilon must lie in (0,1), got {eps}")
    if np.max(np.abs(pi.weights @ P.entries - pi.weights)) > 1e-9:
        raise StationaryMismatchError("supplied law is not stationary for P")
    mixed = (1.0 - eps) * P.entries + eps * pi.weights[None, :]
    return StochasticMatrix(P.space, mixed)

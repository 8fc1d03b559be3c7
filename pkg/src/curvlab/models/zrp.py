"""Zero-range dynamics: occupancy vectors with site-local departure rates.

A site holding k particles expels one at rate r_i(k); the particle lands at
site j with probability G[i, j].  The stationary law has product form in the
one-site fugacities nu_i (the invariant law of G) divided by the running
rate products, and the generator is non-reversible unless G is.  The natural
geometry is half the L1 distance between occupancy vectors, generated by the
single-move pairs (z + e_i, z + e_j).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from ..chain import (
    Generator,
    ProbabilityVector,
    StateSpace,
    StochasticMatrix,
    stationary_distribution,
)
from ..errors import BadRatesError, NotIrreducibleError
from ..metric import GeneratingSet, MetricSpace
from .caps import check_state_count


@dataclass(frozen=True)
class ZRPSpec:
    m: int  # particles
    n: int  # sites
    G: tuple  # irreducible stochastic routing matrix, n-by-n
    rates: tuple  # rates[i][k-1] = r_i(k); length >= m per site

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise BadRatesError("need at least one particle and one site")
        G = np.asarray(self.G, dtype=float)
        if G.shape != (self.n, self.n):
            raise BadRatesError("routing matrix must be n-by-n")
        object.__setattr__(self, "G", tuple(map(tuple, G)))
        rates = tuple(tuple(float(v) for v in row) for row in self.rates)
        object.__setattr__(self, "rates", rates)
        if len(rates) != self.n:
            raise BadRatesError("need one rate sequence per site")
        for row in rates:
            if len(row) < self.m:
                raise BadRatesError("rate sequences must cover occupancies up to m")
            if any(v <= 0 for v in row[: self.m]):
                raise BadRatesError("departure rates must be positive")

    def rate(self, i: int, k: int) -> float:
        """r_i(k) with the r_i(0) = 0 convention (0-based site index)."""
        return 0.0 if k == 0 else self.rates[i][k - 1]

    @staticmethod
    def mean_field(m: int, n: int, nu, rates) -> "ZRPSpec":
        nu = tuple(float(v) for v in nu)
        return ZRPSpec(m, n, tuple(tuple(nu) for _ in range(n)), rates)


def compositions(total: int, parts: int):
    """All occupancy vectors summing to total, in colexicographic order
    (compare from the last site backwards), so reports are reproducible."""
    if parts == 1:
        return [(total,)]
    out = []
    for last in range(total + 1):
        for head in compositions(total - last, parts - 1):
            out.append(head + (last,))
    return sorted(out, key=lambda x: x[::-1])


def _label(x) -> str:
    return ",".join(str(v) for v in x)


def routing_law(spec: ZRPSpec) -> ProbabilityVector:
    """The invariant law nu of the routing matrix G."""
    G = StochasticMatrix(StateSpace.of_size(spec.n), np.asarray(spec.G))
    if not G.is_irreducible:
        raise NotIrreducibleError("routing matrix is not irreducible")
    return stationary_distribution(G)


def is_mean_field(spec: ZRPSpec, tol: float = 1e-12) -> bool:
    """True when every row of G equals the invariant law nu."""
    nu = routing_law(spec).weights
    return bool(np.max(np.abs(np.asarray(spec.G) - nu[None, :])) <= tol)


def build_zrp(spec: ZRPSpec):
    """Generator on occupancy vectors, the product-form stationary law, half
    the L1 metric, and the single-move generating set."""
    m, n = spec.m, spec.n
    check_state_count(comb(m + n - 1, n - 1), "zero-range dynamics")
    nu = routing_law(spec).weights
    G = np.asarray(spec.G)
    states = compositions(m, n)
    space = StateSpace([_label(x) for x in states])
    index = {x: k for k, x in enumerate(states)}

    N = len(states)
    L = np.zeros((N, N))
    for k, x in enumerate(states):
        for i in range(n):
            if x[i] == 0:
                continue
            r = spec.rate(i, x[i])
            for j in range(n):
                if j == i or G[i, j] == 0.0:
                    continue
                y = list(x)
                y[i] -= 1
                y[j] += 1
                L[k, index[tuple(y)]] += r * G[i, j]
    np.fill_diagonal(L, -L.sum(axis=1))
    gen = Generator(space, L)

    logw = np.empty(N)
    for k, x in enumerate(states):
        acc = 0.0
        for i in range(n):
            acc += x[i] * np.log(nu[i])
            for kk in range(1, x[i] + 1):
                acc -= np.log(spec.rate(i, kk))
        logw[k] = acc
    w = np.exp(logw - logw.max())
    pi = ProbabilityVector(space, w / w.sum())
    resid = np.max(np.abs(pi.weights @ L))
    if resid > 1e-10 * max(1.0, np.max(np.abs(L))):
        raise AssertionError("product-form law failed the stationarity check")

    X = np.array(states, dtype=float)
    D = 0.5 * np.abs(X[:, None, :] - X[None, :, :]).sum(axis=2)
    d = MetricSpace(space, D, check_triangle=False)
    pairs = [
        (space.labels[a], space.labels[b])
        for a in range(N)
        for b in range(a + 1, N)
        if D[a, b] == 1.0
    ]
    return gen, pi, d, GeneratingSet(space, pairs)


@dataclass(frozen=True)
class ZRPMonotonicity:
    """Rate monotonicity report with the increment extremes.

    delta and Delta range over the occupancies the discrepancy walk can
    actually see, k in {0, ..., m-1} (so r_i(1) - r_i(0) = r_i(1) is
    included); delta_extended additionally covers the k = m increment when
    r_i(m+1) was supplied.
    """

    holds: bool
    delta: float
    Delta: float
    delta_extended: Optional[float] = None


def zrp_monotone(spec: ZRPSpec) -> ZRPMonotonicity:
    """Check r_i(k) >= r_i(k-1) on [m] and report the increment extremes."""
    m, n = spec.m, spec.n
    holds = all(
        spec.rate(i, k) >= spec.rate(i, k - 1)
        for i in range(n)
        for k in range(1, m + 1)
    )
    increments = [
        spec.rate(i, k + 1) - spec.rate(i, k) for i in range(n) for k in range(m)
    ]
    delta = float(min(increments))
    Delta = float(max(increments))
    extended = None
    if all(len(spec.rates[i]) >= m + 1 for i in range(n)):
        extra = [spec.rates[i][m] - spec.rates[i][m - 1] for i in range(n)]
        extended = float(min(delta, min(extra)))
    return ZRPMonotonicity(holds, delta, Delta, extended)


def adjoint_routing(spec: ZRPSpec) -> np.ndarray:
    """G*(i,j) = nu(j) G(j,i) / nu(i): the routing matrix of the adjoint
    dynamics."""
    nu = routing_law(spec).weights
    G = np.asarray(spec.G)
    return (G.T * nu[None, :]) / nu[:, None]


def adjoint_spec(spec: ZRPSpec) -> ZRPSpec:
    """The same kinetics routed by the adjoint matrix; its generator is the
    adjoint of the original one in L^2(pi)."""
    return ZRPSpec(spec.m, spec.n, tuple(map(tuple, adjoint_routing(spec))), spec.rates)

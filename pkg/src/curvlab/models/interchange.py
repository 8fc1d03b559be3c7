"""Label shuffles on a weighted hypergraph: a random walk on permutations.

A configuration assigns the labels 1..n to the n sites.  Each block A of
sites carries a Poisson clock of rate c(A); when it rings, the labels inside
A are rearranged uniformly at random.  Each individual label then performs a
random walk on the sites with effective conductances

    chat(i, j) = sum over blocks A containing both i and j of c(A) / |A|,

and the meeting time of two such independent walks controls the curvature of
the full shuffle under the minimal-swap metric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from ..bounds import KIND_MODEL, BoundCurve, _clip_ratio
from ..chain import Generator, ProbabilityVector, StateSpace, semigroup_at
from ..errors import BadRatesError, NotConnectedError
from ..metric import GeneratingSet, MetricSpace
from .caps import check_state_count


@dataclass(frozen=True)
class InterchangeSpec:
    n: int
    blocks: tuple  # ((sites...), rate) with 1-based site tuples

    def __post_init__(self):
        if self.n < 2:
            raise BadRatesError("need at least two sites")
        norm = []
        for sites, rate in self.blocks:
            sites = tuple(sorted(int(s) for s in sites))
            rate = float(rate)
            if rate < 0:
                raise BadRatesError("block rates must be non-negative")
            if len(set(sites)) != len(sites):
                raise BadRatesError(f"block {sites} repeats a site")
            if sites and (sites[0] < 1 or sites[-1] > self.n):
                raise BadRatesError(f"block {sites} leaves the site range")
            if rate > 0 and len(sites) >= 2:
                norm.append((sites, rate))
        object.__setattr__(self, "blocks", tuple(norm))
        hat = single_particle_conductances(self)
        n_comp, _ = csgraph.connected_components((hat > 0).astype(np.int8),
                                                 directed=False)
        if n_comp != 1:
            raise NotConnectedError("single-particle conductance graph is disconnected")

    @staticmethod
    def random_transpositions(n: int) -> "InterchangeSpec":
        rate = 4.0 / (n * (n - 1))
        return InterchangeSpec(
            n, tuple(((i, j), rate) for i in range(1, n) for j in range(i + 1, n + 1))
        )


def single_particle_conductances(spec: InterchangeSpec) -> np.ndarray:
    """chat(i,j) = sum_{A containing i and j} c(A)/|A|, as an n-by-n array."""
    hat = np.zeros((spec.n, spec.n))
    for sites, rate in spec.blocks:
        share = rate / len(sites)
        for i, j in itertools.combinations(sites, 2):
            hat[i - 1, j - 1] += share
            hat[j - 1, i - 1] += share
    return hat


def transposition_distance(x, y) -> int:
    """Minimal number of swaps turning x into y: n minus the cycle count of
    the relating permutation."""
    pos = {lab: i for i, lab in enumerate(x)}
    sigma = [pos[lab] for lab in y]
    seen = [False] * len(x)
    cycles = 0
    for s in range(len(x)):
        if not seen[s]:
            cycles += 1
            while not seen[s]:
                seen[s] = True
                s = sigma[s]
    return len(x) - cycles


def build_interchange(spec: InterchangeSpec):
    """Generator on all n! label assignments, uniform stationary law, the
    minimal-swap metric, and the one-swap generating set."""
    n = spec.n
    check_state_count(math.factorial(n), "interchange walk")
    perms = list(itertools.permutations(range(1, n + 1)))
    space = StateSpace(["".join(map(str, p)) for p in perms])
    index = {p: k for k, p in enumerate(perms)}

    N = len(perms)
    L = np.zeros((N, N))
    for sites, rate in spec.blocks:
        share = rate / math.factorial(len(sites))
        zero_based = [s - 1 for s in sites]
        for sigma in itertools.permutations(zero_based):
            if tuple(sigma) == tuple(zero_based):
                continue
            for k, x in enumerate(perms):
                y = list(x)
                for src, dst in zip(zero_based, sigma):
                    y[dst] = x[src]
                L[k, index[tuple(y)]] += share
    np.fill_diagonal(L, -L.sum(axis=1))
    gen = Generator(space, L)

    pi = ProbabilityVector.uniform(space)

    D = np.zeros((N, N))
    for a in range(N):
        for b in range(a + 1, N):
            D[a, b] = D[b, a] = transposition_distance(perms[a], perms[b])
    d = MetricSpace(space, D, check_triangle=False)
    pairs = [
        (space.labels[a], space.labels[b])
        for a in range(N)
        for b in range(a + 1, N)
        if D[a, b] == 1.0
    ]
    return gen, pi, d, GeneratingSet(space, pairs)


def interchange_meeting_tail(spec: InterchangeSpec, times) -> BoundCurve:
    """Worst-pair tail of the meeting time of two independent site walks with
    the effective conductances, computed exactly on the product chain with an
    absorbing diagonal."""
    n = spec.n
    hat = single_particle_conductances(spec)
    space = StateSpace([f"{u + 1}.{v + 1}" for u in range(n) for v in range(n)])
    Q = np.zeros((n * n, n * n))
    for u in range(n):
        for v in range(n):
            if u == v:
                continue  # diagonal states absorb
            row = u * n + v
            for w in range(n):
                if w != u:
                    Q[row, w * n + v] += hat[u, w]
                if w != v:
                    Q[row, u * n + w] += hat[v, w]
    np.fill_diagonal(Q, -Q.sum(axis=1))
    gen = Generator(space, Q)

    off_diagonal = np.array([u != v for u in range(n) for v in range(n)])
    vals = []
    for t in times:
        Pt = semigroup_at(gen, float(t)).entries
        survive = Pt[:, off_diagonal].sum(axis=1)
        vals.append(_clip_ratio(float(np.max(survive[off_diagonal]))))
    return BoundCurve(tuple(float(t) for t in times), tuple(vals), KIND_MODEL)

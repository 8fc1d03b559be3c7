"""Colored exclusion with refreshes: pair swaps plus single-site resampling.

Configurations are color words of length n.  Site pairs {i,j} exchange their
colors at rate c(i,j) and each site i redraws its color from nu at rate r(i).
The chain is reversible for the product law nu^n, and its entropy decay is
governed by a single-particle object: the random walk with conductances c
killed at rate r, whose survival tail max_i P_i(T > t) bounds 1 - kappa(P_t)
under the Hamming metric.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from ..bounds import KIND_MODEL, BoundCurve, _clip_ratio
from ..chain import Generator, ProbabilityVector, StateSpace
from ..errors import BadRatesError, NotIrreducibleError, SingularLaplacianError
from ..metric import GeneratingSet, MetricSpace
from .caps import check_state_count


@dataclass(frozen=True)
class CEPSpec:
    colors: tuple
    nu: tuple
    n: int
    c: tuple  # symmetric (n, n) exchange rates, zero diagonal
    r: tuple  # refresh rates, length n

    def __post_init__(self):
        colors = tuple(str(s) for s in self.colors)
        nu = tuple(float(v) for v in self.nu)
        C = np.asarray(self.c, dtype=float)
        r = tuple(float(v) for v in self.r)
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "c", tuple(map(tuple, C)))
        object.__setattr__(self, "r", r)
        if len(set(colors)) != len(colors) or not colors:
            raise BadRatesError("colors must be distinct and non-empty")
        if len(nu) != len(colors) or any(v <= 0 for v in nu):
            raise BadRatesError("color law must be fully supported")
        if abs(sum(nu) - 1.0) > 1e-9:
            raise BadRatesError("color law must sum to one")
        if C.shape != (self.n, self.n):
            raise BadRatesError("exchange rates must be an n-by-n array")
        if np.any(C < 0) or np.max(np.abs(C - C.T)) > 0 or np.any(np.diag(C) != 0):
            raise BadRatesError("exchange rates must be symmetric, non-negative, zero on the diagonal")
        if len(r) != self.n or any(v < 0 for v in r):
            raise BadRatesError("refresh rates must be non-negative, length n")
        _check_irreducible(self.n, C, r)


def _check_irreducible(n, C, r):
    """Refresh support must meet every connected component of the swap graph."""
    adj = (C > 0).astype(np.int8)
    n_comp, labels = csgraph.connected_components(adj, directed=False)
    for comp in range(n_comp):
        sites = np.flatnonzero(labels == comp)
        if not any(r[i] > 0 for i in sites):
            raise NotIrreducibleError(
                f"no refresh rate on swap-component {sites.tolist()}"
            )


def _label(word, colors):
    return "".join(word) if all(len(s) == 1 for s in colors) else ",".join(word)


def build_cep(spec: CEPSpec):
    """Generator on color words, product stationary law, Hamming metric, and
    the Hamming-distance-1 generating set (independent of where refreshes
    act: those pairs generate the Hamming metric regardless)."""
    colors, n = spec.colors, spec.n
    q = len(colors)
    check_state_count(q**n, "colored exclusion")
    words = list(itertools.product(colors, repeat=n))
    space = StateSpace([_label(w, colors) for w in words])
    index = {w: k for k, w in enumerate(words)}
    nu = dict(zip(colors, spec.nu))
    C = np.asarray(spec.c)

    N = len(words)
    L = np.zeros((N, N))
    for k, w in enumerate(words):
        for i in range(n):
            for j in range(i + 1, n):
                if C[i, j] > 0 and w[i] != w[j]:
                    swapped = list(w)
                    swapped[i], swapped[j] = swapped[j], swapped[i]
                    L[k, index[tuple(swapped)]] += C[i, j]
            if spec.r[i] > 0:
                for s in colors:
                    if s != w[i]:
                        refreshed = w[:i] + (s,) + w[i + 1 :]
                        L[k, index[refreshed]] += spec.r[i] * nu[s]
    np.fill_diagonal(L, -L.sum(axis=1))
    gen = Generator(space, L)

    weights = np.array([np.prod([nu[s] for s in w]) for w in words])
    pi = ProbabilityVector(space, weights / weights.sum())
    if np.max(np.abs(pi.weights @ L)) > 1e-10 * max(1.0, np.max(np.abs(L))):
        raise AssertionError("product law failed the stationarity check")

    H = np.array(
        [[sum(a != b for a, b in zip(u, v)) for v in words] for u in words],
        dtype=float,
    )
    d = MetricSpace(space, H, check_triangle=False)
    pairs = [
        (space.labels[a], space.labels[b])
        for a in range(N)
        for b in range(a + 1, N)
        if H[a, b] == 1.0
    ]
    return gen, pi, d, GeneratingSet(space, pairs)


def laplace_matrix(spec: CEPSpec) -> np.ndarray:
    """The n-by-n killed-walk generator: conductances c off the diagonal,
    -r(i) - sum_k c(i,k) on it."""
    C = np.asarray(spec.c)
    D = C.copy()
    np.fill_diagonal(D, -np.asarray(spec.r) - C.sum(axis=1))
    return D


def cep_killed_tail(spec: CEPSpec, times) -> BoundCurve:
    """max_i P_i(T > t): the worst-site survival tail of the walk killed at
    the refresh rates, from the spectral decomposition of the Laplacian."""
    D = laplace_matrix(spec)
    lam, phi = np.linalg.eigh(-D)
    if lam[0] <= 1e-12:
        raise SingularLaplacianError(
            "killed-walk Laplacian has a (near-)zero eigenvalue; "
            "refresh support misses a swap component"
        )
    ones = phi.T @ np.ones(spec.n)
    vals = []
    for t in times:
        tails = phi @ (np.exp(-lam * float(t)) * ones)
        vals.append(_clip_ratio(float(np.max(tails))))
    return BoundCurve(tuple(float(t) for t in times), tuple(vals), KIND_MODEL)

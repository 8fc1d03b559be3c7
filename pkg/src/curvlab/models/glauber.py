"""Single-site resampling dynamics for a target law on color words.

The target is given either as an explicit weight table on the product space
or as a pairwise-interaction energy; a transition picks a uniform coordinate
and redraws it from the conditional law given the rest.  The weak-dependency
condition compares conditional laws at neighboring configurations and, when
it holds, yields an explicit one-step entropy contraction constant.

For pairwise energies the conditional laws are evaluated from interaction
differences only, so a configuration coordinate with no interactions drops
out of the formula exactly; in particular a product target yields bitwise
identical conditionals at neighboring states and the constant (1/n) exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csgraph

from ..chain import ProbabilityVector, StateSpace, StochasticMatrix
from ..errors import (
    AsymmetricInteractionError,
    BadRatesError,
    DisconnectedSupportError,
)
from ..metric import GeneratingSet, combinatorial_distance
from .caps import check_state_count


@dataclass(frozen=True)
class SpinSystem:
    """Pairwise interactions psi_ij on a color alphabet, sites 1..n.

    Interactions are stored for i < j; the symmetry convention
    psi_ji(tau, sigma) = psi_ij(sigma, tau) is applied internally.
    """

    colors: tuple
    n: int
    psi: tuple  # ((i, j, q-by-q tuple), ...) with i < j, 1-based

    def __post_init__(self):
        colors = tuple(str(s) for s in self.colors)
        object.__setattr__(self, "colors", colors)
        q = len(colors)
        if q < 2:
            raise BadRatesError("need at least two colors")
        seen = {}
        norm = []
        for i, j, mat in self.psi:
            i, j = int(i), int(j)
            M = np.asarray(mat, dtype=float)
            if M.shape != (q, q):
                raise BadRatesError(f"interaction ({i},{j}) must be {q}-by-{q}")
            if i == j:
                if np.any(M != 0):
                    raise AsymmetricInteractionError("self-interactions must vanish")
                continue
            key = (min(i, j), max(i, j))
            M_canon = M if i < j else M.T
            if key in seen:
                if np.max(np.abs(seen[key] - M_canon)) > 0:
                    raise AsymmetricInteractionError(
                        f"interactions ({i},{j}) and ({j},{i}) disagree"
                    )
                continue
            if not (1 <= key[0] < key[1] <= self.n):
                raise BadRatesError(f"interaction sites {key} leave the range")
            seen[key] = M_canon
            norm.append((key[0], key[1], tuple(map(tuple, M_canon))))
        object.__setattr__(self, "psi", tuple(sorted(norm)))

    def interaction(self, i: int, j: int) -> np.ndarray:
        """psi_ij as a q-by-q array (zeros when the pair does not interact)."""
        q = len(self.colors)
        for a, b, mat in self.psi:
            if (a, b) == (min(i, j), max(i, j)):
                M = np.asarray(mat)
                return M if i < j else M.T
        return np.zeros((q, q))


def spin_influences(system: SpinSystem):
    """Influence matrix J and the maximal influence norm.

    J[i, j] is half the largest swing of psi_ij in its first argument; the
    norm is (q - 1) times the largest row sum of J.
    """
    n, q = system.n, len(system.colors)
    J = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            M = system.interaction(i, j)
            swing = float(np.max(M.max(axis=0) - M.min(axis=0)))
            J[i - 1, j - 1] = 0.5 * swing
    norm = (q - 1) * float(np.max(J.sum(axis=1))) if n > 0 else 0.0
    return J, norm


def spin_weights(system: SpinSystem) -> dict:
    """Unnormalized target weights exp(sum of pair energies) per word."""
    colors, n = system.colors, system.n
    cindex = {s: a for a, s in enumerate(colors)}
    pairs = [(i, j, np.asarray(m)) for i, j, m in system.psi]
    out = {}
    for word in itertools.product(colors, repeat=n):
        energy = sum(m[cindex[word[i - 1]], cindex[word[j - 1]]] for i, j, m in pairs)
        out[word] = math.exp(energy)
    return out


@dataclass(frozen=True)
class GlauberSpec:
    """Target law: explicit weights on words, or a pairwise energy."""

    colors: tuple
    n: int
    weights: Optional[tuple] = None  # ((word, weight), ...), zero = excluded
    spin: Optional[SpinSystem] = None

    def __post_init__(self):
        colors = tuple(str(s) for s in self.colors)
        object.__setattr__(self, "colors", colors)
        if (self.weights is None) == (self.spin is None):
            raise BadRatesError("give exactly one of weights or spin")
        if self.spin is not None:
            if self.spin.colors != colors or self.spin.n != self.n:
                raise BadRatesError("spin system disagrees with colors/sites")
            return
        norm = []
        seen = set()
        for word, w in self.weights:
            word = tuple(str(s) for s in word)
            w = float(w)
            if len(word) != self.n or any(s not in colors for s in word):
                raise BadRatesError(f"bad configuration {word}")
            if w < 0:
                raise BadRatesError("weights must be non-negative")
            if word in seen:
                raise BadRatesError(f"duplicate configuration {word}")
            seen.add(word)
            if w > 0:
                norm.append((word, w))
        if not norm:
            raise BadRatesError("target law has empty support")
        object.__setattr__(self, "weights", tuple(sorted(norm)))

    @staticmethod
    def from_spin(system: SpinSystem) -> "GlauberSpec":
        return GlauberSpec(system.colors, system.n, spin=system)


def _weight_table(spec: GlauberSpec) -> dict:
    if spec.spin is not None:
        return spin_weights(spec.spin)
    return dict(spec.weights)


def _label(word, colors):
    return "".join(word) if all(len(s) == 1 for s in colors) else ",".join(word)


def _conditionals_spin(system: SpinSystem, word, cindex):
    """pi_i(.|x) for every site, from interaction differences only."""
    n, q = system.n, len(system.colors)
    out = np.empty((n, q))
    for i in range(1, n + 1):
        u = np.zeros(q)
        for j in range(1, n + 1):
            if j == i:
                continue
            M = system.interaction(i, j)
            u += M[:, cindex[word[j - 1]]]
        u -= u.max()
        e = np.exp(u)
        out[i - 1] = e / e.sum()
    return out


def _conditionals_explicit(table, word, colors, i):
    """pi_i(.|x) from the weight table (may have zero entries)."""
    vals = np.array([table.get(word[: i - 1] + (s,) + word[i:], 0.0) for s in colors])
    total = vals.sum()
    if total <= 0:
        raise AssertionError("conditional law undefined off the support")
    return vals / total


def conditional_laws(spec: GlauberSpec, word) -> np.ndarray:
    """(n, q) array of single-site conditional laws at a support word."""
    colors = spec.colors
    if spec.spin is not None:
        cindex = {s: a for a, s in enumerate(colors)}
        return _conditionals_spin(spec.spin, word, cindex)
    table = _weight_table(spec)
    return np.vstack(
        [_conditionals_explicit(table, word, colors, i) for i in range(1, spec.n + 1)]
    )


def build_glauber(spec: GlauberSpec):
    """Transition matrix on the support of the target, the target law, the
    support-graph shortest-path metric, and the single-site generating set."""
    colors, n = spec.colors, spec.n
    check_state_count(len(colors) ** spec.n, "resampling dynamics")
    table = _weight_table(spec)
    words = [w for w in itertools.product(colors, repeat=n) if table.get(w, 0.0) > 0]
    space = StateSpace([_label(w, colors) for w in words])
    index = {w: k for k, w in enumerate(words)}

    N = len(words)
    P = np.zeros((N, N))
    for k, w in enumerate(words):
        cond = conditional_laws(spec, w)
        for i in range(n):
            for a, s in enumerate(colors):
                p = cond[i, a] / n
                if p == 0.0:
                    continue
                target = w[:i] + (s,) + w[i + 1 :]
                P[k, index[target]] += p
    kernel = StochasticMatrix(space, P)

    adj = np.zeros((N, N), dtype=np.int8)
    for k, w in enumerate(words):
        for i in range(n):
            for s in colors:
                if s != w[i]:
                    other = index.get(w[:i] + (s,) + w[i + 1 :])
                    if other is not None:
                        adj[k, other] = 1
    n_comp, _ = csgraph.connected_components(adj, directed=False)
    if n_comp != 1:
        raise DisconnectedSupportError(
            "target support is not connected under single-site changes"
        )

    weights = np.array([table[w] for w in words])
    pi = ProbabilityVector(space, weights / weights.sum())
    d = combinatorial_distance(kernel)
    pairs = [
        (space.labels[a], space.labels[b])
        for a in range(N)
        for b in range(a + 1, N)
        if adj[a, b]
    ]
    return kernel, pi, d, GeneratingSet(space, pairs)


def glauber_weakdep(spec: GlauberSpec):
    """Check the weak-dependency condition and evaluate its contraction
    constant.

    Over every site i and every support pair (x, y) differing exactly at i,
    the condition requires the conditional mass pi_i(y_i | x) to dominate the
    total positive shift of the other sites' conditionals.  The returned
    constant (valid whenever the condition holds) is

        kappa = (1/n) min { 1 - sum_{j != i} sum_{s != x_j}
                            |pi_j(s|y) - pi_j(s|x)| }.

    The constant is reported even when the condition fails.
    """
    colors, n = spec.colors, spec.n
    table = _weight_table(spec)
    words = [w for w in itertools.product(colors, repeat=n) if table.get(w, 0.0) > 0]
    index = {w: k for k, w in enumerate(words)}
    cindex = {s: a for a, s in enumerate(colors)}
    conds = [conditional_laws(spec, w) for w in words]

    holds = True
    worst = 1.0
    for k, x in enumerate(words):
        for i in range(n):
            for s in colors:
                if s == x[i]:
                    continue
                ky = index.get(x[:i] + (s,) + x[i + 1 :])
                if ky is None:
                    continue
                y = words[ky]
                diff = conds[ky] - conds[k]  # (n, q)
                mask = np.ones((n, len(colors)), dtype=bool)
                mask[i, :] = False
                for j in range(n):
                    if j != i:
                        mask[j, cindex[x[j]]] = False
                pos_shift = float(np.clip(diff, 0.0, None)[mask].sum())
                abs_shift = float(np.abs(diff)[mask].sum())
                if conds[k][i, cindex[y[i]]] < pos_shift - 1e-12:
                    holds = False
                worst = min(worst, 1.0 - abs_shift)
    return holds, worst / n


def solve_epsilon_q(q: int) -> float:
    """Unique root in (0,1) of eps = 1 / (1 + e^{2 eps / q}), by bisection to
    1e-12; increasing in q, approaching 1/2."""
    if q < 1:
        raise ValueError("q must be a positive integer")

    def h(eps):
        return 1.0 / (1.0 + math.exp(2.0 * eps / q)) - eps

    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

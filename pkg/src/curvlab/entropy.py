"""Relative entropy, the entropy-contraction functional, and estimation of
the optimal one-step contraction constant.

The contraction functional ratio(mu) = H(mu P | pi) / H(mu | pi) is maximized
by multi-start projected gradient ascent on the probability simplex; the
near-stationary regime, where the ratio degenerates to a Rayleigh quotient,
is handled analytically through the second eigenvalue of P P* in L^2(pi).
The reported constant is therefore an upper-bound estimate of the true
optimum: ascent may miss the global maximum, never overshoot it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .chain import (
    Generator,
    ProbabilityVector,
    StochasticMatrix,
    generator_stationary,
    semigroup_at,
    stationary_distribution,
)
from .errors import (
    AtStationarityError,
    DimensionMismatchError,
    NotIrreducibleError,
    SupportViolationError,
)

ENTROPY_FLOOR = 1e-14
# Ascent refuses to evaluate the ratio closer to stationarity than this:
# cancellation noise there swamps the quotient, and the near-pi supremum is
# folded in analytically through lambda2 anyway.
_ASCENT_FLOOR = 1e-10
_LOG_CLIP = 1e-300


def relative_entropy(mu: ProbabilityVector, pi: ProbabilityVector) -> float:
    """Kullback-Leibler divergence H(mu | pi), with the 0 log 0 = 0
    convention."""
    if mu.space != pi.space:
        raise DimensionMismatchError("measures live on different spaces")
    return relative_entropy_batch(mu.weights[None, :], pi.weights)[0]


def relative_entropy_batch(rows: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """H(row | pi) for every row of a (k, N) array of distributions."""
    rows = np.asarray(rows, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if np.any((rows > 0) & (pi[None, :] <= 0)):
        raise SupportViolationError("reference law vanishes on the support")
    safe = np.where(rows > 0, rows, 1.0)
    vals = np.sum(np.where(rows > 0, rows * np.log(safe / pi[None, :]), 0.0), axis=1)
    # Gibbs: the exact value is non-negative; tolerate only rounding noise.
    if np.min(vals) < -1e-9:
        raise AssertionError("relative entropy evaluated negative")
    return np.clip(vals, 0.0, None)


def contraction_ratio(
    mu: ProbabilityVector, P: StochasticMatrix, pi: ProbabilityVector
) -> float:
    """One-step entropy contraction factor H(mu P | pi) / H(mu | pi)."""
    if mu.space != P.space:
        raise DimensionMismatchError("measure and kernel spaces differ")
    h0 = relative_entropy(mu, pi)
    if h0 < ENTROPY_FLOOR:
        raise AtStationarityError("contraction ratio undefined at stationarity")
    h1 = relative_entropy(ProbabilityVector(P.space, mu.weights @ P.entries), pi)
    return h1 / h0


def lambda2_ppstar(P: StochasticMatrix) -> float:
    """Second-largest eigenvalue of P P* as an operator on L^2(pi).

    P P* is conjugate to the symmetric positive-semidefinite matrix A A^T
    with A = D^{1/2} P D^{-1/2}, D = diag(pi), so a dense symmetric
    eigensolver applies; eigenvalues within 1e-10 of [0, 1] are clamped.
    """
    if not P.is_irreducible:
        raise NotIrreducibleError("lambda2 needs an irreducible kernel")
    pi = stationary_distribution(P).weights
    root = np.sqrt(pi)
    A = (root[:, None] * P.entries) / root[None, :]
    evals = np.linalg.eigvalsh(A @ A.T)
    lam2 = float(evals[-2]) if P.size > 1 else 0.0
    if lam2 < 0.0:
        if lam2 < -1e-10:
            raise AssertionError("PP* produced a significantly negative eigenvalue")
        lam2 = 0.0
    if lam2 > 1.0:
        if lam2 > 1.0 + 1e-10:
            raise AssertionError("PP* produced an eigenvalue above one")
        lam2 = 1.0
    return lam2


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based),
    renormalized so the result sums to one exactly up to one division."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u + (1.0 - css) / np.arange(1, len(v) + 1) > 0)[0][-1]
    theta = (1.0 - css[rho]) / (rho + 1.0)
    p = np.clip(v + theta, 0.0, None)
    return p / p.sum()


@dataclass(frozen=True)
class AlphaEstimate:
    """Estimated optimal entropy-contraction constant.

    alpha_hat = 1 - max(best ratio found by ascent, lambda2); an upper bound
    on the true constant up to local maxima.  maximizer is the best measure
    found, or the string "near-pi" when the Rayleigh regime dominates.
    converged reports whether the stationarity identity
    (P log P* f)(x) = (1 - alpha) log f(x) holds at the maximizer within tol.
    """

    alpha_hat: float
    maximizer: Union[ProbabilityVector, str]
    lambda2: float
    n_starts: int
    converged: bool


def _ratio_and_grad(mu, P, pi, log_pi):
    """Value and gradient of mu -> H(mu P|pi)/H(mu|pi) on the open simplex."""
    mu_c = np.maximum(mu, _LOG_CLIP)
    log_f = np.log(mu_c) - log_pi
    a = float(np.sum(np.where(mu > 0, mu * log_f, 0.0)))
    mup = mu @ P
    mup_c = np.maximum(mup, _LOG_CLIP)
    log_g = np.log(mup_c) - log_pi
    b = float(np.sum(np.where(mup > 0, mup * log_g, 0.0)))
    if a < _ASCENT_FLOOR:
        return None, None
    # an image entropy below the float floor is numerically zero; dividing
    # it by a small denominator would manufacture a spurious ratio
    val = b / a if b > ENTROPY_FLOOR else 0.0
    grad_a = log_f + 1.0
    grad_b = P @ (log_g + 1.0)
    grad = (grad_b - val * grad_a) / a
    return val, grad


def _ascend(mu0, P, pi, log_pi, max_iter=500):
    """Projected gradient ascent with backtracking from one start point."""
    mu = mu0.copy()
    val, grad = _ratio_and_grad(mu, P, pi, log_pi)
    if val is None:
        return None, None
    step = 1.0 / (np.max(np.abs(grad)) + 1e-30)
    for _ in range(max_iter):
        improved = False
        while step > 1e-14:
            cand = project_to_simplex(mu + step * grad)
            cval, cgrad = _ratio_and_grad(cand, P, pi, log_pi)
            if cval is not None and cval > val + 1e-15:
                mu, val, grad = cand, cval, cgrad
                step = min(step * 2.0, 1e6)
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return val, mu


def _stationarity_residual(mu, P, pi, alpha_hat):
    """Max deviation from the first-order optimality identity at mu.

    Coordinates where both sides are -inf (zero-mass states mapping onto a
    vanishing image) count as exact matches.
    """
    n = len(mu)
    with np.errstate(divide="ignore"):
        log_f = np.log(mu / pi)
        log_g = np.log((mu @ P.entries) / pi)
    lhs = np.empty(n)
    for x in range(n):
        row = P.entries[x]
        sup = row > 0
        lhs[x] = float(np.dot(row[sup], log_g[sup])) if np.any(sup) else 0.0
    scale = 1.0 - alpha_hat
    rhs = np.where(np.isneginf(log_f) & (scale == 0.0), 0.0, scale * log_f)
    res = 0.0
    for x in range(n):
        if np.isneginf(lhs[x]) and np.isneginf(rhs[x]):
            continue
        res = max(res, abs(lhs[x] - rhs[x]))
    return res


def estimate_alpha(
    P: StochasticMatrix, starts: int = 16, tol: float = 1e-6, seed: int = 0
) -> AlphaEstimate:
    """Estimate the optimal one-step entropy contraction constant of P.

    Ascent starts from every Dirac mass plus max(starts - N, 8) symmetric
    Dirichlet draws; a run that converges onto a face of the simplex is
    re-launched once from a point nudged off that face.  The near-stationary
    supremum is the Rayleigh limit lambda2(P P*), folded in analytically.
    """
    if not P.is_irreducible:
        raise NotIrreducibleError("alpha estimation needs an irreducible kernel")
    if starts < 1:
        raise ValueError("starts must be at least 1")
    n = P.size
    pi = stationary_distribution(P).weights
    log_pi = np.log(pi)
    rng = np.random.default_rng(seed)
    start_points = [np.eye(n)[x] for x in range(n)]
    for _ in range(max(starts - n, 8)):
        start_points.append(rng.dirichlet(np.ones(n)))

    best_val, best_mu = -np.inf, None
    for mu0 in start_points:
        val, mu = _ascend(mu0, P.entries, pi, log_pi)
        if val is None:
            continue
        if np.min(mu) < 1e-12:
            nudged = 0.9 * mu + 0.1 / n
            val2, mu2 = _ascend(nudged / nudged.sum(), P.entries, pi, log_pi)
            if val2 is not None and val2 > val:
                val, mu = val2, mu2
        if val > best_val:
            best_val, best_mu = val, mu

    lam2 = lambda2_ppstar(P)
    if best_mu is None or lam2 >= best_val:
        alpha_hat = 1.0 - lam2
        return AlphaEstimate(alpha_hat, "near-pi", lam2, len(start_points), True)
    alpha_hat = 1.0 - best_val
    residual = _stationarity_residual(best_mu, P, pi, alpha_hat)
    return AlphaEstimate(
        alpha_hat,
        ProbabilityVector(P.space, best_mu),
        lam2,
        len(start_points),
        bool(residual <= tol),
    )


@dataclass(frozen=True)
class EntropyCurve:
    """Exact relative entropy to equilibrium along a semigroup."""

    times: tuple
    values: tuple

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")


def entropy_decay_curve(L: Generator, mu0: ProbabilityVector, times) -> EntropyCurve:
    """H(mu0 e^{tL} | pi) at each requested time, computed exactly through
    the uniformized semigroup."""
    if L.space != mu0.space:
        raise DimensionMismatchError("measure and generator spaces differ")
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or times != sorted(times):
        raise ValueError("times must be sorted and non-negative")
    pi = generator_stationary(L)
    vals = []
    for t in times:
        Pt = semigroup_at(L, t)
        mut = ProbabilityVector(L.space, mu0.weights @ Pt.entries)
        vals.append(relative_entropy(mut, pi))
    return EntropyCurve(tuple(times), tuple(vals))

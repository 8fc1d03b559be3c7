"""Event-driven Monte-Carlo simulation of the explicit model couplings.

Each simulator runs the coupling that certifies the model's curvature and
records the coalescence time of every trajectory; the tail estimates are
statistical upper-bound curves for 1 - kappa(P_t) at scales where the exact
transport computation is out of reach.

Randomness is counter-based: every trajectory owns a Philox-4x64 stream
keyed by (seed, sample index), so runs are reproducible bit for bit and a
parallel driver would produce the same numbers as the serial loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadRatesError, MonotonicityViolatedError
from .models.bdp import BirthDeathSpec, bdp_monotone
from .models.interchange import InterchangeSpec
from .models.zrp import ZRPSpec, is_mean_field, routing_law, zrp_monotone

RNG_NAME = "philox4x64"
MIN_SAMPLES = 1000


def trajectory_rng(seed: int, sample: int) -> np.random.Generator:
    """The dedicated random stream of one trajectory."""
    key = np.array([seed, sample], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class CouplingEstimate:
    """Tail estimates P(coalescence > t) with 95% normal confidence radii."""

    times: tuple
    tail_estimate: tuple  # (mean, ci95) per time
    n_samples: int
    seed: int
    rng: str = RNG_NAME

    def means(self):
        return np.array([m for m, _ in self.tail_estimate])

    def radii(self):
        return np.array([c for _, c in self.tail_estimate])


def _check_sampling(times, n_samples, seed):
    times = [float(t) for t in times]
    if not times or any(t < 0 for t in times) or times != sorted(times):
        raise ValueError("times must be a sorted non-empty list of non-negatives")
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples for the normal CI")
    if not (0 <= int(seed) < 2**64):
        raise ValueError("seed must fit an unsigned 64-bit integer")
    return times


def _draw(cumulative, u) -> int:
    """Index of the category whose cumulative bin contains u."""
    return min(int(np.searchsorted(cumulative, u, side="right")), len(cumulative) - 1)


def _estimate(taus, times, n_samples, seed) -> CouplingEstimate:
    taus = np.asarray(taus)
    rows = []
    for t in times:
        p = float(np.mean(taus > t))
        ci = 1.96 * math.sqrt(p * (1.0 - p) / n_samples)
        rows.append((p, ci))
    return CouplingEstimate(tuple(times), tuple(rows), n_samples, int(seed))


def simulate_bdp_pair(
    spec: BirthDeathSpec, x0: int, times, n_samples: int, seed: int
) -> CouplingEstimate:
    """Order-preserving coupling of two birth-death copies started at x0 and
    x0 + 1; the gap stays in {0, 1} and the tail of the coalescence time
    estimates the maximal mean gap m(t)."""
    if not bdp_monotone(spec):
        raise MonotonicityViolatedError("the order-preserving coupling needs monotone rates")
    if not (1 <= x0 < spec.n):
        raise ValueError("x0 must leave room for the upper copy")
    times = _check_sampling(times, n_samples, seed)
    t_max = times[-1]
    qp = (0.0,) + spec.q_plus  # 1-based access
    qm = (0.0,) + spec.q_minus
    taus = np.empty(n_samples)
    for k in range(n_samples):
        rng = trajectory_rng(seed, k)
        x = x0  # lower copy; upper copy is x + 1
        t = 0.0
        tau = np.inf
        while True:
            assert 1 <= x < spec.n  # gap pair stays inside the segment
            up_sync = qp[x + 1]
            x_alone = qp[x] - qp[x + 1]
            down_sync = qm[x]
            y_alone = qm[x + 1] - qm[x]
            total = up_sync + x_alone + down_sync + y_alone
            t += rng.exponential(1.0 / total)
            if t > t_max:
                break
            u = rng.random() * total
            if u < up_sync:
                x += 1
            elif u < up_sync + down_sync:
                x -= 1
            else:
                tau = t  # one copy moved alone: the gap closes
                break
        taus[k] = tau
    return _estimate(taus, times, n_samples, seed)


def simulate_interchange_pair(
    spec: InterchangeSpec, transposition_pair, times, n_samples: int, seed: int
) -> CouplingEstimate:
    """Synchronized shuffles with coalescence repair, started from two label
    assignments differing by one swap; estimates P(X_t != Y_t).

    Every ring applies the same shuffle to both copies, except that a block
    covering both discrepancy sites merges them; the swap distance is checked
    to never increase along the trajectory.
    """
    si, sj = (int(s) for s in transposition_pair)
    if not (1 <= si <= spec.n and 1 <= sj <= spec.n) or si == sj:
        raise ValueError("transposition pair must name two distinct sites")
    times = _check_sampling(times, n_samples, seed)
    t_max = times[-1]
    blocks = [(tuple(s - 1 for s in sites), rate) for sites, rate in spec.blocks]
    rates = np.array([rate for _, rate in blocks])
    total = float(rates.sum())
    cum = np.cumsum(rates)
    taus = np.empty(n_samples)
    for k in range(n_samples):
        rng = trajectory_rng(seed, k)
        x = list(range(1, spec.n + 1))
        y = list(x)
        y[si - 1], y[sj - 1] = y[sj - 1], y[si - 1]
        diff = {si - 1, sj - 1}
        t = 0.0
        tau = np.inf
        while True:
            t += rng.exponential(1.0 / total)
            if t > t_max:
                break
            sites, _ = blocks[_draw(cum, rng.random() * total)]
            if diff <= set(sites):
                tau = t  # repair: replace (x sigma, y sigma) by (x sigma, x sigma)
                break
            perm = rng.permutation(len(sites))
            xs = [x[s] for s in sites]
            ys = [y[s] for s in sites]
            for pos, s in enumerate(sites):
                x[sites[perm[pos]]] = xs[pos]
                y[sites[perm[pos]]] = ys[pos]
            diff = {s for s in range(spec.n) if x[s] != y[s]}
            assert len(diff) == 2  # synchronized shuffles preserve the swap gap
        taus[k] = tau
    return _estimate(taus, times, n_samples, seed)


def _zrp_rates(spec: ZRPSpec, Z, G):
    """Background move rates and the per-site walk increments given Z."""
    n = spec.n
    background = np.zeros(n)
    inc = np.zeros(n)
    for a in range(n):
        background[a] = spec.rate(a, Z[a]) * (1.0 - G[a, a])
        inc[a] = spec.rate(a, Z[a] + 1) - spec.rate(a, Z[a])
    return background, inc


def simulate_zrp_pair(
    spec: ZRPSpec,
    z0,
    i: int,
    j: int,
    times,
    n_samples: int,
    seed: int,
    coupling: str = "independent",
) -> CouplingEstimate:
    """Background dynamics on m-1 particles plus two tagged discrepancy
    walks started at sites i and j; estimates P(I_t != J_t).

    The tagged walks jump with the occupancy-increment rates driven by the
    shared background.  coupling="independent" lets them move independently
    until they meet (any coupling is admissible for the curvature bound);
    coupling="synchronized-refresh" additionally aligns a rate-delta slice of
    their jumps, which needs mean-field routing and reproduces the
    exponential-delta domination.
    """
    mono = zrp_monotone(spec)
    if not mono.holds:
        raise MonotonicityViolatedError("the tagged-walk construction needs monotone rates")
    if coupling not in ("independent", "synchronized-refresh"):
        raise ValueError(f"unknown coupling {coupling!r}")
    z0 = tuple(int(v) for v in z0)
    if len(z0) != spec.n or any(v < 0 for v in z0) or sum(z0) != spec.m - 1:
        raise BadRatesError("background must place m-1 particles on the sites")
    if not (1 <= i <= spec.n and 1 <= j <= spec.n):
        raise ValueError("tagged sites out of range")
    times = _check_sampling(times, n_samples, seed)
    G = np.asarray(spec.G)
    delta = 0.0
    nu = None
    if coupling == "synchronized-refresh":
        if not is_mean_field(spec):
            raise BadRatesError("synchronized-refresh coupling needs mean-field routing")
        nu = routing_law(spec).weights
        nu_cum = np.cumsum(nu)
        delta = mono.delta
    if i == j:
        return _estimate(np.zeros(n_samples), times, n_samples, seed)

    t_max = times[-1]
    n = spec.n
    taus = np.empty(n_samples)
    for k in range(n_samples):
        rng = trajectory_rng(seed, k)
        Z = list(z0)
        I, J = i - 1, j - 1
        t = 0.0
        tau = np.inf
        while True:
            background, inc = _zrp_rates(spec, Z, G)
            bg_total = float(background.sum())
            if coupling == "synchronized-refresh":
                rate_i = (inc[I] - delta) + 0.0
                rate_j = (inc[J] - delta) + 0.0
                joint = delta
            else:
                rate_i = inc[I] * (1.0 - G[I, I])
                rate_j = inc[J] * (1.0 - G[J, J])
                joint = 0.0
            total = bg_total + rate_i + rate_j + joint
            if total <= 0.0:
                break
            t += rng.exponential(1.0 / total)
            if t > t_max:
                break
            u = rng.random() * total
            if u < joint:
                tau = t  # shared refresh lands both walks together
                break
            u -= joint
            if u < rate_i + rate_j:
                moving_i = u < rate_i
                at = I if moving_i else J
                if coupling == "synchronized-refresh":
                    dest = _draw(nu_cum, rng.random())
                else:
                    row = G[at].copy()
                    row[at] = 0.0
                    dest = _draw(np.cumsum(row), rng.random() * row.sum())
                if moving_i:
                    I = dest
                else:
                    J = dest
                if I == J:
                    tau = t
                    break
            else:
                u -= rate_i + rate_j
                src = _draw(np.cumsum(background), u)
                row = G[src].copy()
                row[src] = 0.0
                dest = _draw(np.cumsum(row), rng.random() * row.sum())
                Z[src] -= 1
                Z[dest] += 1
        taus[k] = tau
    return _estimate(taus, times, n_samples, seed)

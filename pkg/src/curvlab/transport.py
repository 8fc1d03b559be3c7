"""Exact optimal transport, Wasserstein contraction constants, and
coupling-feasibility certificates on finite metric spaces.

Wasserstein distances are solved by an in-house transportation network
simplex on the dense cost matrix; the LP duals are kept and every solution
is cross-checked for dual feasibility and complementary slackness before it
is returned.  Coupling feasibility (non-negative sectional curvature) is a
pure feasibility question and is decided by maximum flow on the bipartite
network of allowed cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import ProbabilityVector, StochasticMatrix, _freeze
from .metric import GeneratingSet, MetricSpace
from .errors import DimensionMismatchError, EmptyGeneratingSetError

MARGINAL_TOL = 1e-10
FLOW_TOL = 1e-10
CELL_TOL = 1e-12
SLACKNESS_TOL = 1e-9

_PIVOT_EPS = 1e-12
_DEGENERATE_STREAK = 100


# ---------------------------------------------------------------------------
# transportation network simplex
# ---------------------------------------------------------------------------

def _northwest_corner(a, b):
    """Initial spanning-tree basis (m+n-1 cells) by the northwest-corner rule."""
    m, n = len(a), len(b)
    ra, rb = a.copy(), b.copy()
    basis, flow = [], []
    i = j = 0
    while True:
        t = min(ra[i], rb[j])
        basis.append((i, j))
        flow.append(t)
        ra[i] -= t
        rb[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if ra[i] <= rb[j] and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1
    return basis, flow


def _tree_duals(basis, C, m, n):
    """Dual potentials from the spanning tree: u[i] + v[j] = C[i,j] on basis."""
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(n)]
    for k, (i, j) in enumerate(basis):
        rows[i].append((j, k))
        cols[j].append((i, k))
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack = [("r", 0)]
    while stack:
        kind, idx = stack.pop()
        if kind == "r":
            for j, _ in rows[idx]:
                if np.isnan(v[j]):
                    v[j] = C[idx, j] - u[idx]
                    stack.append(("c", j))
        else:
            for i, _ in cols[idx]:
                if np.isnan(u[i]):
                    u[i] = C[i, idx] - v[idx]
                    stack.append(("r", i))
    return u, v, rows, cols


def _tree_cycle(rows, cols, basis, start_row, end_col, m):
    """Unique tree path from row node start_row to column node end_col,
    returned as the list of basis indices along the path."""
    # BFS over tree nodes; rows are 0..m-1, columns are m..m+n-1.
    prev = {("r", start_row): None}
    queue = [("r", start_row)]
    while queue:
        node = queue.pop(0)
        kind, idx = node
        nbrs = rows[idx] if kind == "r" else cols[idx]
        for other, arc in nbrs:
            nxt = ("c", other) if kind == "r" else ("r", other)
            if nxt not in prev:
                prev[nxt] = (node, arc)
                if nxt == ("c", end_col):
                    path = []
                    cur = nxt
                    while prev[cur] is not None:
                        cur, a = prev[cur]
                        path.append(a)
                    return path
                queue.append(nxt)
    raise RuntimeError("basis is not a spanning tree")  # pragma: no cover


def _transport_simplex(a, b, C, max_iter=200000):
    """Solve min <C,X> over the transportation polytope {X>=0, X1=a, X^T1=b}.

    Returns (X, u, v): the optimal plan and dual potentials.  Dantzig pricing
    with a Bland fallback after a run of degenerate pivots, so termination is
    guaranteed.
    """
    m, n = C.shape
    basis, flow = _northwest_corner(np.asarray(a, float), np.asarray(b, float))
    degenerate_streak = 0
    for _ in range(max_iter):
        u, v, rows, cols = _tree_duals(basis, C, m, n)
        red = C - u[:, None] - v[None, :]
        if degenerate_streak < _DEGENERATE_STREAK:
            ei, ej = np.unravel_index(np.argmin(red), red.shape)
        else:  # Bland: smallest (i,j) with negative reduced cost
            neg = np.argwhere(red < -_PIVOT_EPS)
            if len(neg) == 0:
                break
            ei, ej = neg[0]
        if red[ei, ej] >= -_PIVOT_EPS:
            break
        path = _tree_cycle(rows, cols, basis, ei, ej, m)
        # path runs from the entering column back to the entering row; the
        # arc incident to the entering column must give up theta, and signs
        # alternate from there.
        minus = path[0::2]
        theta = min(flow[k] for k in minus)
        leave = min((k for k in minus if flow[k] <= theta), key=lambda k: basis[k])
        for pos, k in enumerate(path):
            flow[k] += theta if pos % 2 == 1 else -theta
            if flow[k] < 0.0:
                flow[k] = 0.0
        basis[leave] = (int(ei), int(ej))
        flow[leave] = theta
        degenerate_streak = 0 if theta > _PIVOT_EPS else degenerate_streak + 1
    else:  # pragma: no cover
        raise RuntimeError("transportation simplex exceeded iteration cap")
    u, v, _, _ = _tree_duals(basis, C, m, n)
    X = np.zeros((m, n))
    for (i, j), f in zip(basis, flow):
        X[i, j] += f
    return X, u, v


def _verify_optimal(X, u, v, C, a, b):
    """Primal/dual consistency of a transportation solution: feasibility,
    zero duality gap, dual feasibility, complementary slackness."""
    if np.max(np.abs(X.sum(axis=1) - a)) > MARGINAL_TOL:
        raise RuntimeError("transport plan violates left marginal")
    if np.max(np.abs(X.sum(axis=0) - b)) > MARGINAL_TOL:
        raise RuntimeError("transport plan violates right marginal")
    red = C - u[:, None] - v[None, :]
    if red.min() < -SLACKNESS_TOL:
        raise RuntimeError("dual infeasibility in transport solution")
    if np.max(np.abs(X * red)) > SLACKNESS_TOL:
        raise RuntimeError("complementary slackness violated")
    gap = abs(float((X * C).sum()) - (float(u @ a) + float(v @ b)))
    if gap > SLACKNESS_TOL:
        raise RuntimeError("nonzero duality gap in transport solution")


# ---------------------------------------------------------------------------
# couplings and Wasserstein distance
# ---------------------------------------------------------------------------

class Coupling:
    """A joint distribution on X x X with prescribed marginals."""

    def __init__(self, space, joint, left_marginal, right_marginal):
        J = np.asarray(joint, dtype=float)
        n = space.size
        if J.shape != (n, n):
            raise DimensionMismatchError(f"expected ({n},{n}) joint, got {J.shape}")
        if J.min() < 0:
            raise ValueError("coupling entries must be non-negative")
        lm = np.asarray(left_marginal, dtype=float)
        rm = np.asarray(right_marginal, dtype=float)
        if np.max(np.abs(J.sum(axis=1) - lm)) > MARGINAL_TOL:
            raise ValueError("row sums do not match the left marginal")
        if np.max(np.abs(J.sum(axis=0) - rm)) > MARGINAL_TOL:
            raise ValueError("column sums do not match the right marginal")
        self.space = space
        self.joint = _freeze(J)
        self.left_marginal = _freeze(lm)
        self.right_marginal = _freeze(rm)

    def expected_distance(self, d: MetricSpace) -> float:
        return float((self.joint * d.dist).sum())

    def __repr__(self):
        return f"Coupling({self.space})"


def wasserstein(
    mu: ProbabilityVector, nu: ProbabilityVector, d: MetricSpace
) -> tuple[float, Coupling]:
    """Minimal expected distance over couplings of mu and nu, with an
    optimal plan.  Ties between optimal plans are broken by wherever the
    simplex terminates; callers must not rely on plan uniqueness."""
    if mu.space != nu.space or mu.space != d.space:
        raise DimensionMismatchError("mu, nu and the metric must share a space")
    p, q = mu.weights, nu.weights
    I = np.flatnonzero(p > 0)
    J = np.flatnonzero(q > 0)
    a = p[I] / p[I].sum()
    b = q[J] / q[J].sum()
    C = d.dist[np.ix_(I, J)]
    X, u, v = _transport_simplex(a, b, C)
    _verify_optimal(X, u, v, C, a, b)
    full = np.zeros((mu.space.size, mu.space.size))
    full[np.ix_(I, J)] = X
    value = float((full * d.dist).sum())
    return value, Coupling(mu.space, full, p, q)


def lipschitz(f, d: MetricSpace) -> float:
    """Largest ratio |f(x)-f(y)| / d(x,y) over distinct pairs."""
    f = np.asarray(f, dtype=float)
    if f.shape != (d.size,):
        raise DimensionMismatchError(f"expected {d.size} values, got {f.shape}")
    if d.size == 1:
        return 0.0
    denom = d.dist + np.where(np.eye(d.size) > 0, np.inf, 0.0)
    return float(np.max(np.abs(f[:, None] - f[None, :]) / denom))


# ---------------------------------------------------------------------------
# curvature report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureReport:
    """Wasserstein contraction constant of a kernel over a generating set.

    kappa = 1 - max per-pair contraction factor; it may be negative and is
    deliberately not clamped.
    """

    kappa: float
    per_pair: tuple  # (label_x, label_y, W(P(x,.),P(y,.)) / d(x,y))
    generating_set: GeneratingSet

    def worst_pair(self):
        return max(self.per_pair, key=lambda rec: rec[2])


def ollivier_curvature(
    P: StochasticMatrix, d: MetricSpace, S: GeneratingSet
) -> CurvatureReport:
    """Contraction constant kappa of P under d, computed over the pairs of a
    verified generating set (callers are responsible for the verification;
    by convexity of W this equals the constant over all measure pairs)."""
    if P.space != d.space or P.space != S.space:
        raise DimensionMismatchError("kernel, metric and pairs must share a space")
    if len(S) == 0:
        raise EmptyGeneratingSetError("generating set has no pairs")
    labels = P.space.labels
    rows = [ProbabilityVector(P.space, P.entries[x]) for x in range(P.size)]
    per_pair = []
    for i, j in S.pairs:
        w, _ = wasserstein(rows[i], rows[j], d)
        per_pair.append((labels[i], labels[j], w / d.dist[i, j]))
    kappa = 1.0 - max(rec[2] for rec in per_pair)
    return CurvatureReport(kappa, tuple(per_pair), S)


# ---------------------------------------------------------------------------
# sectional (coupling) feasibility via max flow
# ---------------------------------------------------------------------------

class _Dinic:
    """Maximum flow with float capacities (levels + blocking flow)."""

    def __init__(self, n):
        self.n = n
        self.to = []
        self.cap = []
        self.head = [[] for _ in range(n)]

    def add_edge(self, u, v, c):
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(float(c))
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0.0)

    def _levels(self, s, t):
        lvl = [-1] * self.n
        lvl[s] = 0
        q = [s]
        while q:
            u = q.pop(0)
            for e in self.head[u]:
                v = self.to[e]
                if lvl[v] < 0 and self.cap[e] > 1e-15:
                    lvl[v] = lvl[u] + 1
                    q.append(v)
        return lvl if lvl[t] >= 0 else None

    def _push(self, u, t, f, lvl, it):
        if u == t:
            return f
        while it[u] < len(self.head[u]):
            e = self.head[u][it[u]]
            v = self.to[e]
            if self.cap[e] > 1e-15 and lvl[v] == lvl[u] + 1:
                got = self._push(v, t, min(f, self.cap[e]), lvl, it)
                if got > 0:
                    self.cap[e] -= got
                    self.cap[e ^ 1] += got
                    return got
            it[u] += 1
        return 0.0

    def max_flow(self, s, t):
        total = 0.0
        while True:
            lvl = self._levels(s, t)
            if lvl is None:
                return total
            it = [0] * self.n
            while True:
                f = self._push(s, t, np.inf, lvl, it)
                if f <= 0:
                    break
                total += f


@dataclass(frozen=True)
class SectionalCertificate:
    """Result of the per-pair coupling feasibility check.

    holds is True iff for every pair (x,y) of the generating set there is a
    coupling of the rows P*(x,.) and P*(y,.) supported on cells (u,v) with
    d(u,v) <= d(x,y); witnesses maps pair labels to such couplings, and
    failing_pair names the first pair without one.
    """

    holds: bool
    witnesses: dict
    failing_pair: Optional[tuple] = None


def _feasible_coupling(p, q, allowed):
    """Coupling of p and q supported on allowed cells, or None.

    Decided by max flow on the bipartite network source -> supp(p) ->
    supp(q) -> sink; feasible iff the flow carries all mass (value 1 up to
    FLOW_TOL).
    """
    I = np.flatnonzero(p > 0)
    J = np.flatnonzero(q > 0)
    m, n = len(I), len(J)
    net = _Dinic(m + n + 2)
    src, snk = m + n, m + n + 1
    for ii, u in enumerate(I):
        net.add_edge(src, ii, p[u])
    for jj, v in enumerate(J):
        net.add_edge(m + jj, snk, q[v])
    mids = {}
    for ii, u in enumerate(I):
        for jj, v in enumerate(J):
            if allowed[u, v]:
                mids[(ii, jj)] = len(net.to)
                net.add_edge(ii, m + jj, 2.0)
    value = net.max_flow(src, snk)
    if value < 1.0 - FLOW_TOL:
        return None
    joint = np.zeros((len(p), len(q)))
    for (ii, jj), e in mids.items():
        joint[I[ii], J[jj]] = net.cap[e ^ 1]  # flow = gained reverse capacity
    return joint


def sectional_feasible(
    Pstar: StochasticMatrix, d: MetricSpace, S: GeneratingSet
) -> SectionalCertificate:
    """Certify non-negative sectional curvature of the adjoint kernel over a
    verified generating set: for each pair of S, decide whether some coupling
    of the two adjoint rows never increases the distance.  Allowed cells use
    the slack d(u,v) <= d(x,y) + 1e-12."""
    if Pstar.space != d.space or Pstar.space != S.space:
        raise DimensionMismatchError("kernel, metric and pairs must share a space")
    labels = Pstar.space.labels
    witnesses = {}
    for i, j in S.pairs:
        allowed = d.dist <= d.dist[i, j] + CELL_TOL
        joint = _feasible_coupling(Pstar.entries[i], Pstar.entries[j], allowed)
        if joint is None:
            return SectionalCertificate(False, witnesses, (labels[i], labels[j]))
        witnesses[(labels[i], labels[j])] = Coupling(
            Pstar.space, joint, Pstar.entries[i], Pstar.entries[j]
        )
    return SectionalCertificate(True, witnesses)

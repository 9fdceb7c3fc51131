"""Exact couplings on finite spaces.

Optimal transport is solved with a transportation simplex on the supports of
the two marginals (exact vertex solution plus node potentials).  Large
instances go to HiGHS, either as the full transportation LP or, when the cost
is a pseudo-metric with a sparse shortest-path representation, as a
transshipment problem on that graph.  Every solve is certified: primal
feasibility, dual feasibility and a primal-dual gap of at most ``1e-8``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InputError, MarginalMismatch, NotPseudoMetric, SolverFailure, SpaceMismatch
from .metric_space import CostMatrix, Distribution, MetricSpace, TransshipmentGraph, as_weights

MARGINAL_TOL = 1e-10
DUAL_TOL = 1e-10
GAP_TOL = 1e-8
CLOSE_TOL = 1e-12
SIMPLEX_MAX_CELLS = 4096

_HIGHS_OPTIONS = dict(
    primal_feasibility_tolerance=1e-10,
    dual_feasibility_tolerance=1e-10,
    presolve=True,
)


@dataclass(frozen=True, eq=False)
class Coupling:
    joint: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        J = self.joint
        if sparse.issparse(J):
            rows = np.asarray(J.sum(axis=1)).ravel()
            cols = np.asarray(J.sum(axis=0)).ravel()
            neg = J.min() if J.nnz else 0.0
        else:
            J = np.asarray(J, dtype=float)
            rows, cols, neg = J.sum(axis=1), J.sum(axis=0), J.min()
            object.__setattr__(self, "joint", J)
        if neg < 0:
            raise MarginalMismatch("coupling has negative entries", -neg)
        for name, got, want in (("first marginal", rows, self.mu), ("second marginal", cols, self.nu)):
            err = np.abs(got - want).max()
            if err > MARGINAL_TOL:
                raise MarginalMismatch(f"coupling {name}", float(np.abs(got - want).sum()))

    def probability(self, mask: np.ndarray) -> float:
        """Mass of the set of pairs selected by a boolean matrix."""
        if sparse.issparse(self.joint):
            return float(self.joint.multiply(mask).sum())
        return float(self.joint[mask].sum())

    def off_diagonal_mass(self) -> float:
        return 1.0 - float(self.joint.diagonal().sum())


@dataclass(frozen=True, eq=False)
class TransportResult:
    value: float
    coupling: Coupling
    dual_potentials: tuple
    duality_gap: float


def _pair(mu, nu):
    if isinstance(mu, Distribution) and isinstance(nu, Distribution):
        if not mu.space.same_as(nu.space):
            raise SpaceMismatch("distributions live on different spaces")
    a, b = as_weights(mu), as_weights(nu)
    if a.shape != b.shape:
        raise SpaceMismatch(f"vectors of lengths {a.size} and {b.size}")
    return a, b


def _cost_values(cost, n: int) -> np.ndarray:
    C = cost.values if isinstance(cost, CostMatrix) else np.asarray(cost, dtype=float)
    if C.shape != (n, n):
        raise SpaceMismatch(f"cost of shape {C.shape} for {n} states")
    return C


def tv_distance(mu, nu) -> float:
    """``sup_A |mu(A) - nu(A)| = 0.5 * ||mu - nu||_1``."""
    a, b = _pair(mu, nu)
    return 0.5 * float(np.abs(a - b).sum())


# ---------------------------------------------------------------------------
# transportation simplex


def _tree_solution(m, n, cells, a, b):
    """Basic solution of the spanning tree ``cells`` by leaf elimination."""
    adj = [[] for _ in range(m + n)]
    for k, (i, j) in enumerate(cells):
        adj[i].append(k)
        adj[m + j].append(k)
    resid = np.concatenate([a, b]).tolist()
    deg = [len(x) for x in adj]
    used = [False] * len(cells)
    x = [0.0] * len(cells)
    stack = [v for v in range(m + n) if deg[v] == 1]
    while stack:
        v = stack.pop()
        if deg[v] != 1:
            continue
        k = next(k for k in adj[v] if not used[k])
        i, j = cells[k]
        other = m + j if v == i else i
        val = resid[v]
        x[k] = val
        used[k] = True
        resid[other] -= val
        deg[v] -= 1
        deg[other] -= 1
        if deg[other] == 1:
            stack.append(other)
    return x


def _potentials(m, n, cells, C):
    adj = [[] for _ in range(m + n)]
    for i, j in cells:
        adj[i].append(m + j)
        adj[m + j].append(i)
    pot = [None] * (m + n)
    pot[0] = 0.0
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if pot[w] is None:
                i, j = (v, w - m) if v < m else (w, v - m)
                pot[w] = C[i, j] - pot[v]
                stack.append(w)
    return np.array(pot[:m]), np.array(pot[m:])


def _tree_path(m, n, cells, src, dst):
    """Cell indices along the tree path from node ``src`` to node ``dst``."""
    adj = [[] for _ in range(m + n)]
    for k, (i, j) in enumerate(cells):
        adj[i].append((m + j, k))
        adj[m + j].append((i, k))
    parent = {src: None}
    stack = [src]
    while stack:
        v = stack.pop()
        if v == dst:
            break
        for w, k in adj[v]:
            if w not in parent:
                parent[w] = (v, k)
                stack.append(w)
    path = []
    v = dst
    while parent[v] is not None:
        v, k = parent[v]
        path.append(k)
    return path[::-1]


def transportation_simplex(a: np.ndarray, b: np.ndarray, C: np.ndarray):
    """Solve ``min <C, X>`` over couplings of positive vectors ``a``, ``b``.

    Returns ``(X, u, v)`` with node potentials satisfying ``u_i + v_j <= C_ij``
    up to rounding and equality on the basis.  Dantzig pricing, switching to
    Bland's rule after a run of degenerate pivots.
    """
    m, n = C.shape
    scale = max(1.0, float(np.abs(C).max()))
    # north-west corner start: always a spanning tree of m + n - 1 cells
    cells = []
    s, d = a.astype(float).copy(), b.astype(float).copy()
    i = j = 0
    while True:
        cells.append((i, j))
        q = min(s[i], d[j])
        s[i] -= q
        d[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1 or s[i] <= d[j]:
            i += 1
        else:
            j += 1
    x = _tree_solution(m, n, cells, a, b)
    bland = False
    degenerate_run = 0
    for _ in range(50 * m * n + 1000):
        u, v = _potentials(m, n, cells, C)
        red = C - u[:, None] - v[None, :]
        if bland:
            neg = np.flatnonzero(red.ravel() < -1e-12 * scale)
            if neg.size == 0:
                break
            p, q = divmod(int(neg[0]), n)
        else:
            flat = int(np.argmin(red))
            if red.flat[flat] >= -1e-12 * scale:
                break
            p, q = divmod(flat, n)
        path = _tree_path(m, n, cells, m + q, p)
        minus = path[0::2]
        theta = min(x[k] for k in minus)
        leave = min((k for k in minus if x[k] == theta), key=lambda k: cells[k][0] * n + cells[k][1])
        for idx, k in enumerate(path):
            x[k] += -theta if idx % 2 == 0 else theta
        cells[leave] = (p, q)
        x[leave] = theta
        if theta <= 0.0:
            degenerate_run += 1
            if degenerate_run > 2 * (m + n):
                bland = True
        else:
            degenerate_run = 0
    else:
        raise SolverFailure("transportation simplex hit its iteration limit")
    x = _tree_solution(m, n, cells, a, b)
    X = np.zeros((m, n))
    for (i, j), val in zip(cells, x):
        X[i, j] += max(val, 0.0)
    u, v = _potentials(m, n, cells, C)
    return X, u, v


def _highs_transport(a, b, C):
    m, n = C.shape
    rows = np.repeat(np.arange(m), n)
    cols = np.tile(np.arange(n), m)
    var = np.arange(m * n)
    A = sparse.csr_matrix(
        (np.ones(2 * m * n), (np.concatenate([rows, m + cols]), np.concatenate([var, var]))),
        shape=(m + n, m * n),
    )
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None),
                  method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        raise SolverFailure(f"HiGHS transport solve failed: {res.message}")
    duals = res.eqlin.marginals
    return np.clip(res.x.reshape(m, n), 0.0, None), duals[:m], duals[m:]


def _extend_potentials(C, rs, cs, u, v):
    """Extend support potentials to the whole space by c-transforms."""
    N = C.shape[0]
    f = np.empty(N)
    g = np.full(N, np.nan)
    g[cs] = v
    f[rs] = u
    others = np.setdiff1d(np.arange(N), rs)
    if others.size:
        f[others] = (C[np.ix_(others, cs)] - v[None, :]).min(axis=1)
    gothers = np.setdiff1d(np.arange(N), cs)
    if gothers.size:
        g[gothers] = (C[:, gothers] - f[:, None]).min(axis=0)
    return f, g


def _certify(C, a, b, X, f, g):
    value = float((C * X).sum())
    err = max(np.abs(X.sum(axis=1) - a).max(), np.abs(X.sum(axis=0) - b).max())
    dual_violation = float((f[:, None] + g[None, :] - C).max())
    gap = value - float(f @ a) - float(g @ b)
    ok = X.min() >= 0 and err <= MARGINAL_TOL and dual_violation <= DUAL_TOL and abs(gap) <= GAP_TOL
    return ok, value, gap


def wasserstein(mu, nu, cost, method: Optional[str] = None) -> TransportResult:
    """Optimal transport ``inf_gamma sum cost * gamma`` with a certified optimal coupling.

    ``method`` forces ``"simplex"`` or ``"highs"``; by default the simplex is
    used up to 4096 support cells.
    """
    a, b = _pair(mu, nu)
    C = _cost_values(cost, a.size)
    rs, cs = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    if rs.size == 0 or cs.size == 0:
        raise InputError("empty marginal")
    sub = np.ascontiguousarray(C[np.ix_(rs, cs)])
    if method is None:
        method = "simplex" if rs.size * cs.size <= SIMPLEX_MAX_CELLS else "highs"
    attempts = ["simplex", "highs"] if method == "simplex" else ["highs"]
    for route in attempts:
        solver = transportation_simplex if route == "simplex" else _highs_transport
        Xs, u, v = solver(a[rs], b[cs], sub)
        X = np.zeros_like(C)
        X[np.ix_(rs, cs)] = Xs
        f, g = _extend_potentials(C, rs, cs, u, v)
        ok, value, gap = _certify(C, a, b, X, f, g)
        if ok:
            return TransportResult(value, Coupling(X, a, b), (f, g), gap)
    raise SolverFailure(f"transport certificate failed (gap {gap:.3g})")


def _highs_transshipment(supply: np.ndarray, graph: TransshipmentGraph):
    E = graph.tail.size
    arcs = np.arange(E)
    A = sparse.csr_matrix(
        (np.concatenate([np.ones(E), -np.ones(E)]),
         (np.concatenate([graph.tail, graph.head]), np.concatenate([arcs, arcs]))),
        shape=(graph.n_nodes, E),
    )
    b = np.zeros(graph.n_nodes)
    b[: supply.size] = supply
    res = linprog(graph.weight, A_eq=A, b_eq=b, bounds=(0, None), method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        raise SolverFailure(f"HiGHS transshipment failed: {res.message}")
    flow, pot = res.x, res.eqlin.marginals
    value = float(graph.weight @ flow)
    resid = np.abs(A @ flow - b).max()
    dual_violation = float((pot[graph.tail] - pot[graph.head] - graph.weight).max())
    gap = value - float(b @ pot)
    if flow.min() < -MARGINAL_TOL or resid > MARGINAL_TOL or dual_violation > DUAL_TOL or abs(gap) > GAP_TOL:
        raise SolverFailure(f"transshipment certificate failed (gap {gap:.3g}, residual {resid:.3g})")
    return value, pot[: supply.size]


# ---------------------------------------------------------------------------
# capped costs on a line
#
# For c = min(2A, K d) with d a line metric the transport problem is a flow on
# the path (arc weights w_j) plus a hub reachable from every node at price A.
# Writing H_j for the net mass sent into the hub by nodes 0..j, the cost is
#     sum_j w_j |F_j - H_j| + A sum_j |H_j - H_{j-1}|,   H_{-1} = H_{n-1} = 0,
# with F the cumulative supply.  The primal recursion keeps the convex
# piecewise-linear value function as sorted breakpoints; the dual recursion
# does the same for the concave value of potentials |phi| <= A with
# |phi_{j+1} - phi_j| <= w_j.  Each certifies the other via the gap.


@numba.njit(cache=False)
def _line_primal(F, w, A):  # pragma: no cover - compiled
    m = F.size  # number of arcs
    cap = 2 * m + 4
    bp = np.empty(cap)
    cw = np.empty(cap)
    lo = np.empty(m)
    hi = np.empty(m)
    bp[0] = 0.0
    cw[0] = 2.0 * A
    k = 1
    s_left = -A
    for j in range(m):
        # add w_j |F_j - H|
        if w[j] > 0.0:
            pos = k
            while pos > 0 and bp[pos - 1] > F[j]:
                bp[pos] = bp[pos - 1]
                cw[pos] = cw[pos - 1]
                pos -= 1
            bp[pos] = F[j]
            cw[pos] = 2.0 * w[j]
            k += 1
            s_left -= w[j]
        # clip slopes to [-A, A]; record where the clipping starts
        first = 0
        s = s_left
        lo[j] = -np.inf
        if s < -A:
            while first < k - 1 and s + cw[first] < -A:
                s += cw[first]
                first += 1
            cw[first] = s + cw[first] + A
            lo[j] = bp[first]
            s_left = -A
        last = k - 1
        s = s_left
        for q in range(first, k):
            s += cw[q]
        hi[j] = np.inf
        if s > A:
            while last > first and s - cw[last] > A:
                s -= cw[last]
                last -= 1
            cw[last] = A - (s - cw[last])
            hi[j] = bp[last]
        if first > 0 or last < k - 1:
            for q in range(first, last + 1):
                bp[q - first] = bp[q]
                cw[q - first] = cw[q]
            k = last - first + 1
    H = np.empty(m)
    cur = 0.0
    for j in range(m - 1, -1, -1):
        cur = min(max(cur, lo[j]), hi[j])
        H[j] = cur
    value = 0.0
    prev = 0.0
    for j in range(m):
        value += w[j] * abs(F[j] - H[j]) + A * abs(H[j] - prev)
        prev = H[j]
    return value + A * abs(prev), H


@numba.njit(cache=False)
def _line_dual(f, w, A):  # pragma: no cover - compiled
    n = f.size
    cap = 2 * n + 4
    x = np.empty(cap)
    d = np.empty(cap)
    nx = np.empty(cap)
    nd = np.empty(cap)
    peaks = np.empty(n)
    k = 0
    s0 = f[0]
    for j in range(n):
        # locate the peak of the current concave function
        s = s0
        m = 0
        while m < k and s > 0.0:
            s += d[m]
            m += 1
        if s > 0.0:
            peak = A
        elif m == 0:
            peak = -A
        else:
            peak = x[m - 1]
        peaks[j] = peak
        if j == n - 1:
            break
        ww = w[j]
        # window maximum: the rising part moves left, the falling part right,
        # and the peak widens into a flat top
        c = 0
        if m == 0 and s0 <= 0.0:
            nx[c] = -A + ww
            nd[c] = s0
            c += 1
            s0 = 0.0
            for q in range(k):
                nx[c] = x[q] + ww
                nd[c] = d[q]
                c += 1
        elif s > 0.0:
            for q in range(k):
                nx[c] = x[q] - ww
                nd[c] = d[q]
                c += 1
            nx[c] = A - ww
            nd[c] = -s
            c += 1
        else:
            for q in range(m - 1):
                nx[c] = x[q] - ww
                nd[c] = d[q]
                c += 1
            nx[c] = x[m - 1] - ww
            nd[c] = -(s - d[m - 1])
            c += 1
            nx[c] = x[m - 1] + ww
            nd[c] = s
            c += 1
            for q in range(m, k):
                nx[c] = x[q] + ww
                nd[c] = d[q]
                c += 1
        # restrict to [-A, A]
        k = 0
        for q in range(c):
            if nx[q] <= -A:
                s0 += nd[q]
            elif nx[q] < A:
                x[k] = nx[q]
                d[k] = nd[q]
                k += 1
        s0 += f[j + 1]
    phi = np.empty(n)
    cur = peaks[n - 1]
    phi[n - 1] = cur
    for j in range(n - 2, -1, -1):
        cur = min(max(peaks[j], cur - w[j]), cur + w[j])
        cur = min(max(cur, -A), A)
        phi[j] = cur
    return phi


def _line_capped_value(a, b, line) -> float:
    order, w, A = line
    f = (a - b)[order]
    if f.size < 2 or A == 0:
        return 0.0
    value, _ = _line_primal(np.cumsum(f)[:-1], w, A)
    phi = _line_dual(f, w, A)
    dual = float(f @ phi)
    feasible = np.abs(phi).max() <= A * (1 + 1e-12) and np.all(np.abs(np.diff(phi)) <= w * (1 + 1e-12) + 1e-15)
    if not feasible or abs(value - dual) > GAP_TOL:
        raise SolverFailure(f"line transport certificate failed (gap {value - dual:.3g})")
    return float(value)


def transport_value(mu, nu, cost) -> float:
    """Optimal transport value only; uses the sparse graph route for large
    pseudo-metric instances."""
    a, b = _pair(mu, nu)
    _cost_values(cost, a.size)  # shape check
    cells = int((a > 0).sum()) * int((b > 0).sum())
    line = getattr(cost, "line", None)
    if line is not None:
        return _line_capped_value(a, b, line)
    graph = getattr(cost, "graph", None)
    if cells > SIMPLEX_MAX_CELLS and graph is not None and cost.is_pseudo_metric:
        return _highs_transshipment(a - b, graph)[0]
    return wasserstein(a, b, cost).value


def kantorovich_dual_value(mu, nu, cost: CostMatrix) -> float:
    """``max sum phi (mu - nu)`` over ``phi`` that are 1-Lipschitz for ``cost``."""
    if not getattr(cost, "is_pseudo_metric", False):
        raise NotPseudoMetric("Kantorovich-Rubinstein duality needs a pseudo-metric cost")
    a, b = _pair(mu, nu)
    C = _cost_values(cost, a.size)
    graph = cost.graph
    if graph is None:
        n = a.size
        i, j = np.nonzero(~np.eye(n, dtype=bool))
        graph = TransshipmentGraph(n, i, j, C[i, j])
    N, E = graph.n_nodes, graph.tail.size
    arcs = np.arange(E)
    A = sparse.csr_matrix(
        (np.concatenate([np.ones(E), -np.ones(E)]),
         (np.concatenate([arcs, arcs]), np.concatenate([graph.tail, graph.head]))),
        shape=(E, N),
    )
    obj = np.zeros(N)
    obj[: a.size] = -(a - b)
    bounds = [(0.0, 0.0)] + [(None, None)] * (N - 1)
    res = linprog(obj, A_ub=A, b_ub=graph.weight, bounds=bounds, method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        raise SolverFailure(f"HiGHS dual solve failed: {res.message}")
    return float(-res.fun)


def maximal_coupling(mu, nu) -> Coupling:
    """Common part ``min(mu, nu)`` on the diagonal, residuals coupled independently."""
    a, b = _pair(mu, nu)
    common = np.minimum(a, b)
    ra, rb = a - common, b - common
    J = np.diag(common)
    tv = 0.5 * (ra.sum() + rb.sum())
    if tv > 0:
        J = J + np.outer(ra, rb) / tv
    return Coupling(J, a, b)


# ---------------------------------------------------------------------------
# epsilon-closeness


@numba.njit(cache=False)
def _greedy_close(pos, a, b, eps):  # pragma: no cover - compiled
    n = pos.size
    rem = b.copy()
    fi = np.empty(2 * n + 1, dtype=np.int64)
    fj = np.empty(2 * n + 1, dtype=np.int64)
    fm = np.empty(2 * n + 1)
    count = 0
    total = 0.0
    ptr = 0
    for i in range(n):
        need = a[i]
        if need <= 0.0:
            continue
        lo = pos[i] - eps
        hi = pos[i] + eps
        while ptr < n and (pos[ptr] < lo or rem[ptr] <= 0.0):
            ptr += 1
        j = ptr
        while need > 0.0 and j < n and pos[j] <= hi:
            if rem[j] > 0.0:
                take = min(need, rem[j])
                rem[j] -= take
                need -= take
                total += take
                if count == fi.size:
                    break
                fi[count] = i
                fj[count] = j
                fm[count] = take
                count += 1
            if rem[j] <= 0.0:
                j += 1
            elif need > 0.0:
                j += 1
    return total, fi[:count], fj[:count], fm[:count]


def _line_greedy(pos, a, b, eps):
    order = np.argsort(pos, kind="stable")
    total, fi, fj, fm = _greedy_close(pos[order], a[order], b[order], eps + CLOSE_TOL)
    return total, order[fi], order[fj], fm


def closeness_value(mu, nu, space: MetricSpace, eps: float) -> float:
    """``sup_Gamma Gamma(d <= eps)`` without materialising the coupling."""
    a, b = _pair(mu, nu)
    pos = space.line_positions
    if pos is not None:
        return min(1.0, _line_greedy(pos, a, b, eps)[0])
    return max_closeness(a, b, space, eps)[0]


def max_closeness(mu, nu, d, eps: float):
    """Coupling maximising the probability of ``{d(x', y') <= eps}``.

    ``d`` is the :class:`MetricSpace` or any pseudo-metric :class:`CostMatrix`.
    On spaces embedded in a line the optimum is found greedily (matching each
    point to the leftmost unmatched mass in its window); otherwise through the
    transport problem with cost ``1(d > eps)``.
    """
    if eps < 0:
        raise InputError("eps must be nonnegative")
    a, b = _pair(mu, nu)
    D = d.dist if isinstance(d, MetricSpace) else _cost_values(d, a.size)
    if D.shape[0] != a.size:
        raise SpaceMismatch("metric and distributions differ in size")
    close = D <= eps + CLOSE_TOL
    pos = d.line_positions if isinstance(d, MetricSpace) else None
    if pos is not None:
        total, fi, fj, fm = _line_greedy(pos, a, b, eps)
        J = np.zeros((a.size, a.size))
        np.add.at(J, (fi, fj), fm)
        ra = np.clip(a - J.sum(axis=1), 0.0, None)
        rb = np.clip(b - J.sum(axis=0), 0.0, None)
        r = 0.5 * (ra.sum() + rb.sum())
        if r > 0:
            J += np.outer(ra, rb) / r
        coupling = Coupling(J, a, b)
    else:
        coupling = wasserstein(a, b, (~close).astype(float)).coupling
    return coupling.probability(close), coupling


# ---------------------------------------------------------------------------
# gluing


def _shared_marginal(g12, g23):
    left = np.asarray(g12.sum(axis=0)).ravel()
    right = np.asarray(g23.sum(axis=1)).ravel()
    err = float(np.abs(left - right).sum())
    if left.size != right.size or err > MARGINAL_TOL:
        raise MarginalMismatch("glued couplings disagree on the shared marginal", err)
    return right


def glue(gamma12, gamma23) -> np.ndarray:
    """Triple law ``T[i,j,k] = g12[i,j] g23[j,k] / nu[j]`` with the given pair laws."""
    g12 = gamma12.joint if isinstance(gamma12, Coupling) else np.asarray(gamma12, dtype=float)
    g23 = gamma23.joint if isinstance(gamma23, Coupling) else np.asarray(gamma23, dtype=float)
    nu = _shared_marginal(g12, g23)
    cond = np.divide(g23, nu[:, None], out=np.zeros_like(g23), where=nu[:, None] > 0)
    return g12[:, :, None] * cond[None, :, :]


def glue_outer(gamma12, gamma23):
    """``(V1, V3)`` marginal of :func:`glue` without forming the triple.

    ``gamma23`` may be a scipy sparse matrix.
    """
    g12 = gamma12.joint if isinstance(gamma12, Coupling) else gamma12
    g23 = gamma23.joint if isinstance(gamma23, Coupling) else gamma23
    nu = _shared_marginal(g12, g23)
    inv = np.divide(1.0, nu, out=np.zeros_like(nu), where=nu > 0)
    if sparse.issparse(g23):
        cond = sparse.diags(inv) @ g23
        return np.asarray((cond.T @ np.asarray(g12).T).T)
    return (np.asarray(g12) * inv[None, :]) @ g23


@numba.njit(cache=False)
def _greedy_pairs(pos, W, eps):  # pragma: no cover - compiled
    k, n = W.shape
    out = np.ones((k, k))
    for p in range(k):
        for q in range(p + 1, k):
            rem = W[q].copy()
            total = 0.0
            ptr = 0
            for i in range(n):
                need = W[p, i]
                if need <= 0.0:
                    continue
                lo = pos[i] - eps
                hi = pos[i] + eps
                while ptr < n and (pos[ptr] < lo or rem[ptr] <= 0.0):
                    ptr += 1
                j = ptr
                while need > 0.0 and j < n and pos[j] <= hi:
                    take = min(need, rem[j])
                    rem[j] -= take
                    need -= take
                    total += take
                    if rem[j] <= 0.0:
                        j += 1
            out[p, q] = out[q, p] = min(total, 1.0)
    return out


def pairwise_closeness(rows: np.ndarray, space: MetricSpace, eps: float) -> np.ndarray:
    """Matrix of ``sup_Gamma Gamma(d <= eps)`` between all pairs of the given
    distributions (rows); the diagonal is 1."""
    rows = np.asarray(rows, dtype=float)
    pos = space.line_positions
    if pos is not None:
        order = np.argsort(pos, kind="stable")
        return _greedy_pairs(pos[order], np.ascontiguousarray(rows[:, order]), eps + CLOSE_TOL)
    k = rows.shape[0]
    out = np.ones((k, k))
    for p in range(k):
        for q in range(p + 1, k):
            out[p, q] = out[q, p] = max_closeness(rows[p], rows[q], space, eps)[0]
    return out

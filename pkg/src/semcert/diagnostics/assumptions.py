"""Generalized-coupling assumptions A1/A2 and the constructions built on them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from .._parallel import pmap
from ..errors import A1NotSatisfied, InputError
from ..kernel import Kernel
from ..reports import Report
from ..transport import Coupling, glue, glue_outer, maximal_coupling
from .certificates import AsfPlusCertificate, ConstantF, TableF, combine
from .providers import DEFAULT_TOL, CouplingProvider, PushCache, Tolerances, provider_summary


@dataclass
class A1Record:
    x: int
    y: int
    t: int
    u: float
    d: float
    tv: float
    tv_bound: float
    expected_gap: float
    gap_bound: float
    tv_passed: bool
    gap_passed: bool
    margin: float
    passed: bool


@dataclass
class A2Record:
    x: int
    y: int
    t: int
    tv: float
    tv_bound: float
    expected_gap: float
    gap_bound: float
    tv_passed: bool
    gap_passed: bool
    margin: float
    passed: bool


@dataclass
class A1Report(Report):
    # inputs kept for envelope fitting; underscored so reports stay serializable
    _inputs: dict = None


@dataclass
class A2Report(Report):
    suggested_eps: float = 0.0


def _tv(p, q):
    return 0.5 * float(np.abs(p - q).sum())


def _prepare(kernel, provider, pairs, times):
    if provider.kernel is not kernel and not provider.kernel.space.same_as(kernel.space):
        raise InputError("provider was built for a different kernel")
    times = sorted(int(t) for t in times)
    if not times or times[0] < 0:
        raise InputError("times must be nonnegative integers")
    pushes = PushCache(kernel)
    pushes.prefetch({v for p in pairs for v in p}, times[-1])
    return pushes, times


def _measure(kernel, provider, pairs, times, tol):
    pushes, times = _prepare(kernel, provider, pairs, times)
    jobs = [(x, y, t) for x, y in pairs for t in times]

    def run(job):
        x, y, t = job
        law_z, ed = provider_summary(provider, pushes, x, y, t, tol)
        return _tv(law_z, pushes(x, t)), ed

    return jobs, pmap(run, jobs), times


def verify_a1(kernel: Kernel, provider: CouplingProvider, F1, F2, r_func: Callable, pair_grid, times,
              x0: Optional[int] = None, tol: Tolerances = DEFAULT_TOL) -> A1Report:
    """Exact check of both parts of A1 on a grid of ``(x, y, t)``.

    Part 1: ``d_TV(Law Z, P_t(x, .)) <= F1(u) d(x, y)``; part 2:
    ``E d(Z, Y) <= F2(u) r(t) d(x, y)`` with ``u = d(x, x0) v d(y, x0)``.
    """
    space = kernel.space
    x0 = space.base_index if x0 is None else int(x0)
    pairs = [(int(x), int(y)) for x, y in pair_grid]
    jobs, measured, times = _measure(kernel, provider, pairs, times, tol)
    D, r0 = space.dist, space.dist[x0]
    records = []
    for (x, y, t), (tv, ed) in zip(jobs, measured):
        u, d = float(max(r0[x], r0[y])), float(D[x, y])
        tv_bound = float(F1(u)) * d
        gap_bound = float(F2(u)) * float(r_func(t)) * d
        m1, m2 = tv_bound - tv, gap_bound - ed
        ok1, ok2 = m1 >= -tol.record, m2 >= -tol.record
        records.append(A1Record(x, y, t, u, d, tv, tv_bound, ed, gap_bound, ok1, ok2, min(m1, m2), ok1 and ok2))
    report = A1Report("a1", records, _inputs=dict(F1=F1, F2=F2, r_func=r_func, x0=x0, times=times),
                      summary={"x0": x0, "F1": F1.to_dict(), "F2": F2.to_dict(),
                               "r": getattr(r_func, "__name__", "r"), "provider": provider.name})
    return report.finalize()


def fit_a1_bounds(kernel: Kernel, provider: CouplingProvider, r_func: Callable, pair_grid, times,
                  x0: Optional[int] = None, kind: str = "constant", tol: Tolerances = DEFAULT_TOL):
    """Smallest ``F1``, ``F2`` (constants or step tables in ``u``) that make A1
    hold on the grid."""
    space = kernel.space
    x0 = space.base_index if x0 is None else int(x0)
    pairs = [(int(x), int(y)) for x, y in pair_grid]
    jobs, measured, _ = _measure(kernel, provider, pairs, times, tol)
    D, r0 = space.dist, space.dist[x0]
    us, need1, need2 = [], [], []
    for (x, y, t), (tv, ed) in zip(jobs, measured):
        d = D[x, y]
        us.append(max(r0[x], r0[y]))
        need1.append(tv / d if d > 0 else 0.0)
        rt = float(r_func(t))
        if d > 0 and rt > 0:
            need2.append(ed / (rt * d))
        elif ed > tol.record:
            raise A1NotSatisfied(f"E d(Z, Y) = {ed:.3g} > 0 where the A1 bound is 0 (x={x}, y={y}, t={t})")
        else:
            need2.append(0.0)
    if kind == "constant":
        return ConstantF(max(need1, default=0.0)), ConstantF(max(need2, default=0.0))
    if kind != "table":
        raise InputError("kind must be 'constant' or 'table'")
    knots = np.unique(us)
    idx = np.searchsorted(knots, us)

    def table(need):
        per = np.zeros(knots.size)
        np.maximum.at(per, idx, need)
        return TableF(tuple(knots), tuple(np.maximum.accumulate(per)))

    return table(need1), table(need2)


def verify_a2(kernel: Kernel, provider: CouplingProvider, B_indices, eps: float, R_func: Callable, times,
              tol: Tolerances = DEFAULT_TOL) -> A2Report:
    """Check A2 on every ordered pair in ``B``; also report the largest passing
    ``eps``, i.e. ``1 - max TV``."""
    B = [int(b) for b in B_indices]
    if not B:
        raise InputError("B must be non-empty")
    if not 0 < eps <= 1:
        raise InputError("eps must lie in (0, 1]")
    pairs = [(x, y) for x in B for y in B]
    jobs, measured, times = _measure(kernel, provider, pairs, times, tol)
    records = []
    for (x, y, t), (tv, ed) in zip(jobs, measured):
        gap_bound = float(R_func(t))
        m1, m2 = (1 - eps) - tv, gap_bound - ed
        ok1, ok2 = m1 >= -tol.record, m2 >= -tol.record
        records.append(A2Record(x, y, t, tv, 1 - eps, ed, gap_bound, ok1, ok2, min(m1, m2), ok1 and ok2))
    max_tv = max((r.tv for r in records), default=0.0)
    report = A2Report("a2", records, suggested_eps=1.0 - max_tv,
                      summary={"eps": eps, "B_size": len(B), "suggested_eps": 1.0 - max_tv,
                               "R": getattr(R_func, "__name__", "R"), "provider": provider.name})
    return report.finalize()


@dataclass
class Theorem23Result:
    """Output of the gluing construction.

    ``coupling`` is the law of ``(V^X, V^Y)``; ``triple`` the full glued law of
    ``(V^X, V^Z, V^Y)``, kept only for spaces of at most 60 states.
    """

    closeness: float
    p_equal: float
    p_gap_close: float
    lower_bound: float
    bound_holds: bool
    coupling: Coupling
    triple: Optional[np.ndarray] = None


def theorem23_construction(kernel: Kernel, provider: CouplingProvider, x: int, y: int, t: int, delta: float,
                           tol: Tolerances = DEFAULT_TOL) -> Theorem23Result:
    """Glue a maximal coupling of ``(P_t(x, .), Law Z)`` to the provider's
    ``(Z, Y)`` and measure ``P(d(V^X, V^Y) <= delta)``.

    The result always satisfies ``closeness >= P(X~ = Z~) + P(d(Z, Y) <= delta) - 1``.
    """
    if delta < 0:
        raise InputError("delta must be nonnegative")
    pushes = PushCache(kernel)
    law_z, _ = provider_summary(provider, pushes, x, y, t, tol)
    J = provider.joint(x, y, t)
    M = maximal_coupling(pushes(x, t), law_z)
    VV = glue_outer(M.joint, J)
    coupling = Coupling(VV, pushes(x, t), pushes(y, t))
    D = kernel.space.dist
    close = D <= delta + 1e-12
    closeness = coupling.probability(close)
    p_equal = float(np.trace(M.joint))
    Jd = J.toarray() if sparse.issparse(J) else np.asarray(J)
    p_gap = float(Jd[close].sum())
    lower = p_equal + p_gap - 1.0
    triple = glue(M.joint, Jd) if kernel.size <= 60 else None
    return Theorem23Result(closeness, p_equal, p_gap, lower, closeness >= lower - tol.inequality, coupling, triple)


def fit_asf_plus_envelope(a1_report: A1Report) -> AsfPlusCertificate:
    """ASF+ certificate ``t_n = n``, ``delta_n = r(n)``, ``F = 2 F1 + F2`` from a
    passing A1 verification."""
    if not a1_report.passed:
        w = a1_report.worst
        raise A1NotSatisfied(f"A1 fails at (x={w.x}, y={w.y}, t={w.t})")
    inputs = a1_report._inputs
    times = [t for t in inputs["times"] if t >= 1]
    if not times:
        raise A1NotSatisfied("A1 report has no positive times")
    us = sorted({r.u for r in a1_report.records})
    F = combine(2.0, inputs["F1"], 1.0, inputs["F2"], at=us)
    slacks = [float(inputs["r_func"](t)) for t in times]
    return AsfPlusCertificate(inputs["x0"], tuple(times), tuple(slacks), F, F_bounded=F.bounded)

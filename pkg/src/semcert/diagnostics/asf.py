"""Asymptotic strong Feller checks.

The ASF+ left-hand side ``sup |P_t phi(x) - P_t phi(y)|`` over
``{||phi||_inf <= A, Lip(phi) <= K}`` is evaluated exactly as the transport
value under ``min(2A, K d)``: shifting ``phi`` by a constant leaves the
difference unchanged, so the sup-norm ball can be traded for oscillation
``<= 2A``, and that class is the unit Lipschitz ball of the capped cost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .._parallel import pmap
from ..errors import InputError
from ..kernel import Kernel
from ..metric_space import capped_lipschitz_cost, separating_family
from ..reports import Report
from ..transport import transport_value
from .certificates import AsfPlusCertificate
from .providers import DEFAULT_TOL, PushCache, Tolerances


@dataclass
class AsfPlusRecord:
    x: int
    y: int
    n: int
    t: int
    A: float
    K: float
    lhs: float
    rhs: float
    margin: float
    passed: bool


def all_pairs(n: int):
    return list(combinations(range(n), 2))


def check_asf_plus(kernel: Kernel, cert: AsfPlusCertificate, pair_grid=None, ak_grid=((1.0, 1.0),),
                   tol: Tolerances = DEFAULT_TOL) -> Report:
    """Check the ASF+ bound for every pair, certificate index ``n`` and ``(A, K)``."""
    space = kernel.space
    if not 0 <= cert.x0 < space.size:
        raise InputError(f"certificate x0={cert.x0} is not a state index")
    pairs = all_pairs(space.size) if pair_grid is None else [(int(x), int(y)) for x, y in pair_grid]
    for x, y in pairs:
        if not (0 <= x < space.size and 0 <= y < space.size):
            raise InputError(f"pair ({x}, {y}) outside the state space")
    ak = [(float(A), float(K)) for A, K in ak_grid]
    if any(A <= 0 or K <= 0 for A, K in ak):
        raise InputError("(A, K) grid entries must be positive")
    costs = [capped_lipschitz_cost(space, A, K) for A, K in ak]
    pushes = PushCache(kernel)
    starts = sorted({v for p in pairs for v in p})
    pushes.prefetch(starts, max(cert.times))
    D = space.dist
    r0 = D[cert.x0]

    jobs = [(x, y, n, c) for n in range(len(cert.times)) for c in range(len(ak)) for x, y in pairs]

    def run(job):
        x, y, n, c = job
        t = cert.times[n]
        A, K = ak[c]
        lhs = 0.0 if x == y else transport_value(pushes(x, t), pushes(y, t), costs[c])
        rhs = D[x, y] * float(cert.F(max(r0[x], r0[y]))) * (A + cert.slacks[n] * K)
        margin = rhs - lhs
        return AsfPlusRecord(x, y, n, t, A, K, lhs, rhs, margin, margin >= -tol.asf_plus)

    records = pmap(run, jobs)
    report = Report("asf-plus", records, summary={
        "x0": cert.x0, "pairs": len(pairs), "ak_grid": ak, "certificate": cert.to_dict()})
    return report.finalize()


@dataclass
class AsfProfile:
    """``values[k, j] = sup_{y in B_r_j(x), y != x} W_{d_n}(P_t delta_x, P_t delta_y)``
    for ``n = n_list[k]``; ``tail_estimate[j]`` is the max over the tail half of
    ``n_list``, a heuristic proxy for the limsup."""

    x: int
    times: list
    n_list: list
    radii: list
    values: np.ndarray
    tail_estimate: np.ndarray
    empty_ball: list = field(default_factory=list)
    argmax: list = field(default_factory=list)


def asf_profile(kernel: Kernel, x: int, times, n_list, radii) -> AsfProfile:
    space = kernel.space
    times, n_list, radii = list(times), [int(n) for n in n_list], [float(r) for r in radii]
    if len(times) != len(n_list):
        raise InputError("times and n_list must have the same length")
    if any(r <= 0 for r in radii):
        raise InputError("radii must be positive")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InputError("n_list must be increasing")
    pushes = PushCache(kernel)
    d = space.dist[x]
    rmax = max(radii)
    ys = [int(y) for y in np.flatnonzero(d < rmax) if y != x]
    pushes.prefetch([x] + ys, max(times))
    values = np.zeros((len(n_list), len(radii)))
    argmax = [[None] * len(radii) for _ in n_list]
    empty = [not any(d[y] < r for y in ys) for r in radii]
    for k, (n, t) in enumerate(zip(n_list, times)):
        cost = separating_family(space, n)
        w = np.array(pmap(lambda y: transport_value(pushes(x, t), pushes(y, t), cost), ys)) if ys else np.zeros(0)
        for j, r in enumerate(radii):
            inside = np.flatnonzero(d[ys] < r) if ys else np.zeros(0, dtype=int)
            if inside.size:
                best = inside[int(np.argmax(w[inside]))]
                values[k, j] = w[best]
                argmax[k][j] = ys[best]
    tail = values[len(n_list) // 2:].max(axis=0) if n_list else np.zeros(len(radii))
    return AsfProfile(x, times, n_list, radii, values, tail, empty, argmax)

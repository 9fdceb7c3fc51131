"""Local weak irreducibility on a finite list of times."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InputError
from ..kernel import Kernel
from ..reports import Report
from ..transport import pairwise_closeness
from .providers import DEFAULT_TOL, PushCache, Tolerances


@dataclass
class LwiRecord:
    t: int
    value: float
    x: int
    y: int
    margin: float
    passed: bool


def check_lwi(kernel: Kernel, R: float, eps: float, times, x0: Optional[int] = None,
              tol: Tolerances = DEFAULT_TOL) -> Report:
    """``min_{x, y in B_R(x0)} sup_Gamma Gamma(d <= eps)`` at each listed time.

    The existential "for all t >= T" is judged on the list: the first time
    with a positive value is reported as T and every later listed time must
    also be positive.
    """
    if R <= 0 or eps <= 0:
        raise InputError("R and eps must be positive")
    times = sorted(int(t) for t in times)
    if not times or times[0] < 0:
        raise InputError("times must be a non-empty list of nonnegative integers")
    space = kernel.space
    x0 = space.base_index if x0 is None else int(x0)
    ball = space.ball(x0, R)
    pushes = PushCache(kernel)
    pushes.prefetch(ball, times[-1])
    records = []
    for t in times:
        rows = np.array([pushes(int(x), t) for x in ball])
        C = pairwise_closeness(rows, space, eps)
        flat = int(np.argmin(C))
        p, q = divmod(flat, C.shape[0])
        value = float(C[p, q])
        records.append(LwiRecord(t, value, int(ball[p]), int(ball[q]), value - tol.lwi_positive,
                                 value > tol.lwi_positive))
    first = next((r.t for r in records if r.passed), None)
    report = Report("lwi", records, summary={
        "x0": x0, "R": R, "eps": eps, "ball_size": int(ball.size), "first_passing_time": first})
    report.finalize()
    if first is not None:
        # only times from T on are required to pass
        report.passed = all(r.passed for r in records if r.t >= first)
    return report

"""Uniqueness verdict and the support separation bound."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DistinctMeasuresRequired, EmptySupport, SpaceMismatch
from ..kernel import Kernel, invariant_measures
from ..metric_space import Distribution
from ..reports import Report, plain
from .asf import check_asf_plus
from .certificates import AsfPlusCertificate
from .lwi import check_lwi
from .providers import DEFAULT_TOL, Tolerances

SUPPORT_TOL = 1e-12

IMPLIED = "implied"


@dataclass
class Verdict:
    """``status`` is ``"implied"`` or ``"not-implied: <reasons>"``.

    ``consistent`` is false only if uniqueness was implied while the kernel
    has more than one ergodic measure, which would contradict the theorem.
    """

    status: str
    reasons: list
    F_sup_observed: float
    F_bounded_declared: bool
    truncated: bool
    decomposition_count: int
    consistent: bool
    asf_plus: Report
    lwi: Report
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == IMPLIED

    def to_dict(self, records: bool = False) -> dict:
        d = plain(self)
        d["passed"] = self.passed
        if not records:
            for key in ("asf_plus", "lwi"):
                d[key].pop("records")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        keys = ["status", "F_sup_observed", "F_bounded_declared", "truncated", "decomposition_count", "consistent"]
        row = [str(plain(getattr(self, k))) for k in keys]
        return ",".join(keys) + "\n" + ",".join(f'"{v}"' if "," in v else v for v in row) + "\n"


def uniqueness_verdict(kernel: Kernel, cert: AsfPlusCertificate, lwi_params: dict, pair_grid=None,
                       ak_grid=((1.0, 1.0),), tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Combine ASF+ with bounded ``F`` and LWI into "at most one invariant
    measure", and cross-check against the ergodic decomposition.

    ``lwi_params`` holds ``R``, ``eps``, ``times`` and optionally ``x0``
    (defaults to the certificate's base point).
    """
    asf = check_asf_plus(kernel, cert, pair_grid=pair_grid, ak_grid=ak_grid, tol=tol)
    params = dict(lwi_params)
    params.setdefault("x0", cert.x0)
    lwi = check_lwi(kernel, tol=tol, **params)
    radial = kernel.space.dist[cert.x0]
    F_sup = float(np.max(cert.F(radial)))
    truncated = bool(kernel.meta.get("truncated", False))
    reasons = []
    if not asf.passed:
        reasons.append("ASF+ bound fails")
    if not lwi.passed:
        reasons.append("LWI fails")
    if not cert.bounded:
        reasons.append("F unbounded")
        if truncated:
            # finite on the truncation, yet the declared F grows without bound
            reasons.append("truncation-dependent")
    status = IMPLIED if not reasons else "not-implied: " + "/".join(reasons)
    count = len(invariant_measures(kernel))
    consistent = status != IMPLIED or count <= 1
    return Verdict(status, reasons, F_sup, bool(cert.F_bounded), truncated, count, consistent, asf, lwi,
                   summary={"model": kernel.meta.get("model", "custom"), "x0": cert.x0})


@dataclass
class SeparationResult:
    ratio: float
    witness: tuple
    passed: bool
    pairs_checked: int


def support_separation(mu1: Distribution, mu2: Distribution, F, x0: int,
                       tol: Tolerances = DEFAULT_TOL) -> SeparationResult:
    """``min d(w1, w2) F(d(w1, x0) v d(w2, x0))`` over the two supports.

    Distinct ergodic measures of an ASF+ kernel keep this ratio at least 1.
    """
    if not mu1.space.same_as(mu2.space):
        raise SpaceMismatch("measures live on different spaces")
    a, b = mu1.weights, mu2.weights
    if np.abs(a - b).max() <= SUPPORT_TOL:
        raise DistinctMeasuresRequired("support separation needs two distinct ergodic measures")
    s1 = np.flatnonzero(a > SUPPORT_TOL)
    s2 = np.flatnonzero(b > SUPPORT_TOL)
    if s1.size == 0 or s2.size == 0:
        raise EmptySupport("a measure has no atom above 1e-12")
    D = mu1.space.dist
    r0 = D[x0]
    u = np.maximum.outer(r0[s1], r0[s2])
    ratio = D[np.ix_(s1, s2)] * np.asarray(F(u), dtype=float).reshape(u.shape)
    i, j = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    value = float(ratio[i, j])
    return SeparationResult(value, (int(s1[i]), int(s2[j])), value >= 1 - tol.separation, int(ratio.size))

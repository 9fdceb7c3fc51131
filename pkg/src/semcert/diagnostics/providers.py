"""Generalized-coupling providers and shared checker plumbing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import InputError, MarginalMismatch
from ..kernel import Kernel


@dataclass(frozen=True)
class Tolerances:
    asf_plus: float = 1e-9
    record: float = 1e-10
    marginal: float = 1e-10
    lwi_positive: float = 1e-12
    separation: float = 1e-9
    inequality: float = 1e-10

    def replace(self, **overrides) -> "Tolerances":
        bad = [k for k in overrides if k not in self.__dataclass_fields__]
        if bad:
            raise InputError(f"unknown tolerance {bad[0]!r}")
        if any(v <= 0 for v in overrides.values()):
            raise InputError("tolerances must be positive")
        return Tolerances(**{**self.__dict__, **overrides})


DEFAULT_TOL = Tolerances()


class PushCache:
    """Memoised rows ``P_t delta_x``, advanced one step at a time per start."""

    def __init__(self, kernel: Kernel):
        self.kernel = kernel
        self._rows = {}

    def __call__(self, x: int, t: int) -> np.ndarray:
        hist = self._rows.get(x)
        if hist is None:
            w = np.zeros(self.kernel.size)
            w[x] = 1.0
            hist = self._rows[x] = [w]
        while len(hist) <= t:
            hist.append(hist[-1] @ self.kernel.matrix)
        return hist[t]

    def prefetch(self, starts, t: int):
        """Batch-advance many starts at once (one matrix product per step)."""
        starts = [x for x in dict.fromkeys(int(s) for s in starts) if len(self._rows.get(x, ())) <= t]
        if not starts:
            return
        W = np.zeros((len(starts), self.kernel.size))
        W[np.arange(len(starts)), starts] = 1.0
        hists = [[row.copy()] for row in W]
        for _ in range(t):
            W = W @ self.kernel.matrix
            for h, row in zip(hists, W):
                h.append(row)
        for x, h in zip(starts, hists):
            self._rows[x] = h


class CouplingProvider:
    """Family of joint laws of ``(Z, Y)`` indexed by ``(x, y, t)``.

    ``joint`` returns a matrix (dense or scipy sparse) with rows indexed by
    the value of ``Z`` and columns by the value of ``Y``; ``Y`` must have law
    ``P_t(y, .)``.
    """

    name = "provider"

    def __init__(self, kernel: Kernel):
        self.kernel = kernel
        self.pushes = PushCache(kernel)

    def joint(self, x: int, y: int, t: int):
        raise NotImplementedError

    def summary(self, x: int, y: int, t: int):
        """``(law_z, law_y, E d(Z, Y))`` of the joint at ``(x, y, t)``."""
        J = self.joint(x, y, t)
        D = self.kernel.space.dist
        if sparse.issparse(J):
            J = J.tocsr()
            law_z = np.asarray(J.sum(axis=1)).ravel()
            law_y = np.asarray(J.sum(axis=0)).ravel()
            r, c = J.nonzero()
            ed = float(np.asarray(J[r, c]).ravel() @ D[r, c])
        else:
            law_z, law_y = J.sum(axis=1), J.sum(axis=0)
            ed = float((J * D).sum())
        return law_z, law_y, ed


class DiagonalProvider(CouplingProvider):
    """``Z = Y ~ P_t(y, .)``."""

    name = "diagonal"

    def joint(self, x, y, t):
        return sparse.diags(self.pushes(y, t)).tocsr()


class IndependentProvider(CouplingProvider):
    """``Z ~ P_t(x, .)`` independent of ``Y ~ P_t(y, .)``."""

    name = "independent"

    def joint(self, x, y, t):
        return np.outer(self.pushes(x, t), self.pushes(y, t))


class ExplicitProvider(CouplingProvider):
    """Joints listed per ``(x, y, t)``, e.g. loaded from a provider file."""

    name = "explicit"

    def __init__(self, kernel: Kernel, joints: dict):
        super().__init__(kernel)
        n = kernel.size
        self.joints = {}
        for key, J in joints.items():
            J = np.asarray(J, dtype=float)
            if J.shape != (n, n) or J.min() < 0 or abs(J.sum() - 1) > 1e-10:
                raise InputError(f"provider joint at (x, y, t)={key} is not a probability matrix on {n} states")
            self.joints[tuple(int(k) for k in key)] = J

    def joint(self, x, y, t):
        try:
            return self.joints[(x, y, t)]
        except KeyError:
            raise InputError(f"provider has no joint for (x, y, t)=({x}, {y}, {t})") from None


def provider_summary(provider: CouplingProvider, pushes: PushCache, x, y, t, tol: Tolerances):
    """Provider summary with the ``Law(Y) = P_t(y, .)`` check applied."""
    law_z, law_y, ed = provider.summary(x, y, t)
    err = float(np.abs(law_y - pushes(y, t)).sum())
    if err > tol.marginal:
        raise MarginalMismatch(f"provider Law(Y) at (x={x}, y={y}, t={t}) differs from P_t(y, .)", err)
    return law_z, ed

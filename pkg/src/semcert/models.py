"""Built-in example chains, closed-form oracles and coupling providers."""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy import sparse
from scipy.special import ndtr

from .diagnostics.providers import CouplingProvider, DiagonalProvider, IndependentProvider
from .errors import GridResolutionTooCoarse, InputError, NonpositiveTime, OutOfDomain
from .kernel import Kernel
from .metric_space import space_from_positions


@dataclass(frozen=True)
class XiChainSpec:
    """Two interleaved lattices ``1..N`` and ``n + xi/n``; level ``N`` stands for
    all levels ``>= N`` (half reset, half stay)."""

    xi: float = 0.4
    depth: int = 40

    def __post_init__(self):
        if not 0 < self.xi < 0.5:
            raise InputError(f"xi must lie in (0, 1/2), got {self.xi!r}")
        if int(self.depth) != self.depth or self.depth < 2:
            raise InputError(f"depth must be an integer >= 2, got {self.depth!r}")


@dataclass(frozen=True)
class IntervalChainSpec:
    """Uniform grid on ``[0, 3]``; ``grid_points - 1`` must be a multiple of 3 so
    that 1 is a grid point."""

    grid_points: int = 3001

    def __post_init__(self):
        n = self.grid_points
        if int(n) != n or n < 31:
            raise GridResolutionTooCoarse(f"grid needs at least 31 points, got {n!r}")
        if (n - 1) % 3:
            raise GridResolutionTooCoarse(f"grid_points - 1 must be divisible by 3 (got {n})")


@dataclass(frozen=True)
class GaussianWalkSpec:
    """Unit-variance Gaussian steps on the grid ``k * step``, ``|k * step| <= half_width``."""

    half_width: float = 8.0
    step: float = 0.01

    def __post_init__(self):
        if self.half_width < 6:
            raise InputError(f"half_width must be >= 6, got {self.half_width!r}")
        if not 0 < self.step <= 0.05:
            raise InputError(f"step must lie in (0, 0.05], got {self.step!r}")


# xi-chain

def _xi_layout(spec: XiChainSpec):
    N = int(spec.depth)
    levels = np.arange(1, N + 1, dtype=float)
    pos = np.concatenate([levels, levels + spec.xi / levels])
    labels = [str(n) for n in range(1, N + 1)] + [f"{n}+xi/{n}" for n in range(1, N + 1)]
    # successor under a reset coin and under an advance coin; the top level
    # lumps the tail, so advancing from it stays put
    reset = np.repeat([0, N], N)
    advance = np.concatenate([np.arange(1, N + 1), np.arange(N + 1, 2 * N + 1)])
    advance[N - 1], advance[2 * N - 1] = N - 1, 2 * N - 1
    return labels, pos, reset, advance


def build_xi_chain(spec: XiChainSpec = XiChainSpec()) -> Kernel:
    labels, pos, reset, advance = _xi_layout(spec)
    n = len(labels)
    P = np.zeros((n, n))
    np.add.at(P, (np.arange(n), reset), 0.5)
    np.add.at(P, (np.arange(n), advance), 0.5)
    space = space_from_positions(labels, pos, base_index=0)
    return Kernel(space, P, meta={"model": "xi-chain", "truncated": True, "xi": spec.xi, "depth": int(spec.depth)})


def xi_chain_measures(spec: XiChainSpec = XiChainSpec()):
    """``sum 2^-i delta_i`` and ``sum 2^-i delta_{i + xi/i}`` cut at level ``N``
    (not renormalised, so each misses mass ``2^-N``)."""
    N = int(spec.depth)
    w = 0.5 ** np.arange(1, N + 1)
    return np.concatenate([w, np.zeros(N)]), np.concatenate([np.zeros(N), w])


class XiSyncProvider(CouplingProvider):
    """``Z`` from ``x`` and ``Y`` from ``y`` driven by one shared coin: both reset
    or both advance."""

    name = "xi-sync"

    def __init__(self, kernel: Kernel, spec: XiChainSpec):
        super().__init__(kernel)
        _, _, self.reset, self.advance = _xi_layout(spec)
        self._last = {}

    def joint(self, x, y, t):
        # keep only the latest time per start pair; grids are walked in increasing t
        n = self.kernel.size
        s, J = self._last.get((x, y), (None, None))
        if s is None or s > t:
            s, J = 0, np.zeros((n, n))
            J[x, y] = 1.0
        while s < t:
            r, c = np.nonzero(J)
            w = 0.5 * J[r, c]
            J = np.zeros((n, n))
            np.add.at(J, (self.reset[r], self.reset[c]), w)
            np.add.at(J, (self.advance[r], self.advance[c]), w)
            s += 1
        self._last[(x, y)] = (s, J)
        return J


def xi_chain_sync_provider(spec: XiChainSpec = XiChainSpec(), kernel: Kernel = None) -> XiSyncProvider:
    return XiSyncProvider(build_xi_chain(spec) if kernel is None else kernel, spec)


# interval chain

def _interval_image(x: float) -> float:
    """Left end of the support of ``P_1(x, .)``; the support has length 1/3."""
    return 2.0 - sqrt(x) if x <= 1 else 2.0 / 3.0 + x / 3.0


def _interval_edges(m: int) -> np.ndarray:
    h = 3.0 / (m - 1)
    edges = (np.arange(m + 1) - 0.5) * h
    edges[0], edges[-1] = 0.0, 3.0
    return edges


def interval_row(x: float, grid_points: int = 3001) -> np.ndarray:
    """One-step law from an arbitrary ``x`` in ``[0, 3]`` binned onto the grid cells."""
    if not 0 <= x <= 3:
        raise OutOfDomain(f"x={x!r} outside [0, 3]")
    edges = _interval_edges(grid_points)
    a = _interval_image(x)
    overlap = np.clip(np.minimum(edges[1:], a + 1 / 3) - np.maximum(edges[:-1], a), 0.0, None)
    return overlap / overlap.sum()


def build_interval_chain(spec: IntervalChainSpec = IntervalChainSpec()) -> Kernel:
    m = spec.grid_points
    pos = 3.0 * np.arange(m) / (m - 1)
    P = np.array([interval_row(float(x), m) for x in pos])
    space = space_from_positions([f"{x:.10g}" for x in pos], pos, base_index=0)
    return Kernel(space, P, meta={"model": "interval", "truncated": False, "grid_points": m})


def interval_chain_closed_form(n: int, u: float) -> float:
    """``P_n phi(u)`` for ``phi(z) = z``."""
    if int(n) != n or n < 1:
        raise OutOfDomain(f"n must be a positive integer, got {n!r}")
    if not 0 <= u <= 3:
        raise OutOfDomain(f"u={u!r} outside [0, 3]")
    if u >= 1:
        return 1.25 * (1 - 3.0 ** -n) + 3.0 ** -n * u
    return 1.25 * (1 - 3.0 ** (1 - n)) + 3.0 ** (1 - n) * (2 - sqrt(u) + 1 / 6)


def interval_asf_probe(kernel: Kernel, ys, t1: int = 1, delta1: float = 0.0):
    """For ``phi(z) = z`` and start pair ``(0, y)``: the measured gap
    ``|P_t1 phi(0) - P_t1 phi(y)|`` and the ``F(1)`` an ASF+ certificate would need."""
    if kernel.meta.get("model") != "interval":
        raise InputError("probe needs the interval grid kernel")
    m = kernel.size
    tail = kernel.space.dist[0].copy()  # phi(z) = z, as distance from 0
    for _ in range(t1 - 1):
        tail = kernel.matrix @ tail
    base = interval_row(0.0, m) @ tail
    out = []
    for y in ys:
        gap = abs(base - interval_row(float(y), m) @ tail)
        out.append({"y": float(y), "gap": float(gap), "closed_form": 3.0 ** (1 - t1) * sqrt(y),
                    "required_F1": float(gap / (y * (3 + delta1)))})
    return out


# Gaussian walk

def _gaussian_cells(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """``N(x, 1)`` mass of each cell, computed from the nearer tail so rows mirror exactly."""
    lo = edges[None, :-1] - x[:, None]
    hi = edges[None, 1:] - x[:, None]
    left = ndtr(hi) - ndtr(lo)
    right = ndtr(-lo) - ndtr(-hi)
    centre = 0.5 * (lo + hi)
    return np.where(centre <= 0, left, right)


def build_gaussian_walk(spec: GaussianWalkSpec = GaussianWalkSpec()) -> Kernel:
    h = spec.step
    m = int(round(spec.half_width / h))
    k = np.arange(-m, m + 1)
    pos = k * h
    edges = np.concatenate([[-np.inf], (k[:-1] + 0.5) * h, [np.inf]])
    P = _gaussian_cells(pos, edges)
    P /= P.sum(axis=1, keepdims=True)
    space = space_from_positions([f"{x:.10g}" for x in pos], pos, base_index=m)
    return Kernel(space, P, meta={"model": "gaussian", "truncated": True, "half_width": float(spec.half_width),
                                  "step": float(h), "offset": m})


def gaussian_coords(kernel: Kernel) -> np.ndarray:
    return (np.arange(kernel.size) - kernel.meta["offset"]) * kernel.meta["step"]


def gaussian_tv_closed_form(x: float, y: float, t: float) -> float:
    """``d_TV(N(x, t), N(y, t)) = 2 Phi(|x - y| / (2 sqrt t)) - 1``."""
    if t <= 0:
        raise NonpositiveTime(f"t must be positive, got {t!r}")
    return float(2 * ndtr(abs(x - y) / (2 * sqrt(t))) - 1)


class GaussianShiftProvider(CouplingProvider):
    """Shared noise with the gap contracted by ``1 - lam`` per step.

    ``Y ~ P_t(y, .)`` and ``Z = Y - (1 - lam)^t (y - x)``; an off-grid shift is
    split linearly between the two neighbouring grid shifts, which keeps
    ``E |Z - Y|`` equal to the continuous gap. Shifts leaving the grid stop at
    the boundary cell.
    """

    name = "gaussian-shift"

    def __init__(self, kernel: Kernel, lam: float):
        if not 0 < lam < 1:
            raise InputError(f"lam must lie in (0, 1), got {lam!r}")
        if kernel.meta.get("model") != "gaussian":
            raise InputError("gaussian-shift provider needs a Gaussian walk kernel")
        super().__init__(kernel)
        self.lam = float(lam)
        self.h = kernel.meta["step"]
        self.coords = gaussian_coords(kernel)

    def gap(self, x, y, t) -> float:
        """``Y_t - Z_t``, deterministic."""
        return (1 - self.lam) ** t * (self.coords[y] - self.coords[x])

    def _split(self, x, y, t):
        s = self.gap(x, y, t) / self.h
        lo = np.floor(s)
        f = s - lo
        return int(lo), f

    @staticmethod
    def _shifted(w, k):
        return np.clip(np.arange(w.size) - k, 0, w.size - 1)

    def joint(self, x, y, t):
        w = self.pushes(y, t)
        lo, f = self._split(x, y, t)
        cols = np.arange(w.size)
        rows = np.concatenate([self._shifted(w, lo), self._shifted(w, lo + 1)])
        vals = np.concatenate([(1 - f) * w, f * w])
        J = sparse.coo_matrix((vals, (rows, np.concatenate([cols, cols]))), shape=(w.size, w.size))
        return J.tocsr()

    def _shift_law(self, w, k):
        """Law of ``Z`` index ``i - k`` for ``Y`` index ``i ~ w``, clipped to the grid."""
        n = w.size
        out = np.zeros(n)
        if k >= 0:
            kk = min(k, n)
            out[: n - kk] = w[kk:]
            out[0] += w[:kk].sum()
        else:
            kk = min(-k, n)
            out[kk:] = w[: n - kk]
            out[-1] += w[n - kk:].sum()
        return out

    def _shift_gap(self, w, k):
        # E |Z - Y| for an integer shift: |k| h except for mass stopped at the boundary
        n = w.size
        if k == 0:
            return 0.0
        pos = self.coords
        if k > 0:
            kk = min(k, n)
            return abs(k) * self.h * float(w[kk:].sum()) + float(w[:kk] @ (pos[:kk] - pos[0]))
        kk = min(-k, n)
        return abs(k) * self.h * float(w[: n - kk].sum()) + float(w[n - kk:] @ (pos[-1] - pos[n - kk:]))

    def summary(self, x, y, t):
        w = self.pushes(y, t)
        lo, f = self._split(x, y, t)
        law_z = (1 - f) * self._shift_law(w, lo)
        ed = (1 - f) * self._shift_gap(w, lo)
        if f > 0:
            law_z += f * self._shift_law(w, lo + 1)
            ed += f * self._shift_gap(w, lo + 1)
        return law_z, w, ed


def gaussian_shift_contraction_provider(kernel: Kernel, lam: float = 0.5) -> GaussianShiftProvider:
    return GaussianShiftProvider(kernel, lam)


def gaussian_pair_grid(kernel: Kernel, span: float = 2.0, spacing: float = 0.5, close=(0.01, 0.1)):
    """Pairs among the points ``-span, ..., span`` plus a few short-range pairs
    at the origin (the dense all-pairs grid has over a million entries)."""
    pos = gaussian_coords(kernel)

    def near(v):
        return int(np.argmin(np.abs(pos - v)))

    pts = [near(v) for v in np.arange(-span, span + spacing / 2, spacing)]
    pairs = [(a, b) for i, a in enumerate(pts) for b in pts[i + 1:]]
    pairs += [(near(0.0), near(c)) for c in close]
    return sorted(set(pairs))


# registries used by the CLI and provider files

def build_model(name: str, **params) -> Kernel:
    try:
        if name == "xi-chain":
            return build_xi_chain(XiChainSpec(**params))
        if name == "interval":
            return build_interval_chain(IntervalChainSpec(**params))
        if name == "gaussian":
            return build_gaussian_walk(GaussianWalkSpec(**params))
    except TypeError as exc:
        raise InputError(f"model {name!r}: {exc}") from None
    raise InputError(f"unknown model {name!r} (expected xi-chain, interval or gaussian)")


def builtin_provider(name: str, kernel: Kernel, **params) -> CouplingProvider:
    if name == "diagonal":
        return DiagonalProvider(kernel)
    if name == "independent":
        return IndependentProvider(kernel)
    if name == "xi-sync":
        if kernel.meta.get("model") != "xi-chain":
            raise InputError("xi-sync provider needs a xi-chain kernel")
        return XiSyncProvider(kernel, XiChainSpec(kernel.meta["xi"], kernel.meta["depth"]))
    if name == "gaussian-shift":
        return GaussianShiftProvider(kernel, float(params.get("lam", 0.5)))
    raise InputError(f"unknown builtin provider {name!r}")


BUILTIN_PROVIDERS = ("diagonal", "independent", "xi-sync", "gaussian-shift")

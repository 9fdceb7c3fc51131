"""Finite metric state spaces, probability vectors and transport costs."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AsymmetricDistance,
    BadBaseIndex,
    InputError,
    NegativeDistance,
    NonFiniteValue,
    NonpositiveParameters,
    NotPseudoMetric,
    SpaceMismatch,
    TriangleViolation,
)

TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def worst_triangle_violation(dist: np.ndarray):
    """Return ``(excess, (i, j, k))`` maximising ``d[i,k] - d[i,j] - d[j,k]``."""
    n = dist.shape[0]
    best, arg = -np.inf, (0, 0, 0)
    for j in range(n):
        excess = dist - (dist[:, j, None] + dist[None, j, :])
        flat = int(np.argmax(excess))
        if excess.flat[flat] > best:
            best = float(excess.flat[flat])
            arg = (flat // n, j, flat % n)
    return best, arg


def _line_positions(dist: np.ndarray, tol: float) -> Optional[np.ndarray]:
    # On a line the point farthest from any point is an endpoint.
    n = dist.shape[0]
    if n <= 2:
        return dist[0].copy() if n else np.zeros(0)
    end = int(np.argmax(dist[0]))
    pos = dist[end].copy()
    scale = max(1.0, float(pos.max()))
    if np.max(np.abs(np.abs(pos[:, None] - pos[None, :]) - dist)) <= tol * scale:
        return pos
    return None


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite labelled point set with a validated distance matrix and base point."""

    labels: tuple
    dist: np.ndarray
    base_index: int = 0

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def base(self) -> int:
        return self.base_index

    @cached_property
    def line_positions(self) -> Optional[np.ndarray]:
        """Coordinates realising ``dist`` isometrically on the real line, if any."""
        return _line_positions(self.dist, 1e-9)

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.size else 0.0

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown state label {label!r}") from None

    def ball(self, center: int, radius: float) -> np.ndarray:
        """Indices of the open ball ``{z : d(z, center) < radius}``."""
        return np.flatnonzero(self.dist[center] < radius)

    def radial(self, i, j=None):
        """``d(x, x0) v d(y, x0)``, vectorised over index arrays."""
        r = self.dist[self.base_index]
        if j is None:
            return r[i]
        return np.maximum(r[i], r[j])

    def dirac(self, i: int) -> "Distribution":
        w = np.zeros(self.size)
        w[i] = 1.0
        return Distribution(self, w)

    def same_as(self, other: "MetricSpace") -> bool:
        return self is other or (
            self.labels == other.labels and np.array_equal(self.dist, other.dist)
        )


def validate_space(labels: Sequence, dist, base_index: int = 0) -> MetricSpace:
    """Check metric axioms to within ``1e-12`` and build a :class:`MetricSpace`."""
    labels = tuple(str(s) for s in labels)
    d = np.asarray(dist, dtype=float)
    n = len(labels)
    if d.ndim != 2 or d.shape != (n, n):
        raise InputError(f"distance must be a {n}x{n} matrix, got shape {d.shape}")
    if len(set(labels)) != n:
        raise InputError("state labels must be unique")
    if not np.all(np.isfinite(d)):
        raise NonFiniteValue("distance matrix contains non-finite entries")
    if n and d.min() < -TOL:
        raise NegativeDistance(f"negative distance {d.min():.3g}")
    if n and np.abs(np.diag(d)).max() > TOL:
        raise InputError("distance matrix must have zero diagonal")
    asym = np.abs(d - d.T)
    if n and asym.max() > TOL:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise AsymmetricDistance(f"d({i},{j}) != d({j},{i}) (difference {asym[i, j]:.3g})")
    if not (isinstance(base_index, (int, np.integer)) and 0 <= base_index < max(n, 1)) or n == 0:
        raise BadBaseIndex(f"base_index {base_index!r} out of range for {n} states")
    d = np.clip(0.5 * (d + d.T), 0.0, None)
    np.fill_diagonal(d, 0.0)
    if _line_positions(d, 1e-9) is None:
        excess, triple = worst_triangle_violation(d)
        if excess > TOL:
            raise TriangleViolation(triple, excess)
    return MetricSpace(labels, _frozen(d), int(base_index))


def space_from_positions(labels, positions, base_index: int = 0) -> MetricSpace:
    p = np.asarray(positions, dtype=float)
    return validate_space(labels, np.abs(p[:, None] - p[None, :]), base_index)


@dataclass(frozen=True, eq=False)
class Distribution:
    space: MetricSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.space.size,):
            raise SpaceMismatch(f"weights of length {w.shape} on a space of {self.space.size} states")
        if not np.all(np.isfinite(w)):
            raise NonFiniteValue("distribution has non-finite weights")
        if w.min() < 0 or abs(w.sum() - 1.0) > TOL:
            raise InputError(f"weights must be nonnegative and sum to 1 (sum={w.sum()!r})")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > TOL)


def as_weights(mu, space: Optional[MetricSpace] = None) -> np.ndarray:
    """Raw weight vector of a :class:`Distribution` or array, checking the space."""
    if isinstance(mu, Distribution):
        if space is not None and not mu.space.same_as(space):
            raise SpaceMismatch("distribution lives on a different space")
        return mu.weights
    w = np.asarray(mu, dtype=float)
    if space is not None and w.shape != (space.size,):
        raise SpaceMismatch(f"vector of length {w.shape} on a space of {space.size} states")
    return w


@dataclass(frozen=True)
class TransshipmentGraph:
    """Weighted directed graph whose shortest-path metric on the first
    ``n_states`` nodes reproduces a cost matrix.  Extra nodes are hubs."""

    n_nodes: int
    tail: np.ndarray
    head: np.ndarray
    weight: np.ndarray


@dataclass(frozen=True, eq=False)
class CostMatrix:
    values: np.ndarray
    is_pseudo_metric: bool = False
    graph: Optional[TransshipmentGraph] = field(default=None, repr=False)
    # (order, arc weights, A) when the cost is min(2A, K d) on a line, d a
    # line metric: states in line order and K times consecutive gaps
    line: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        c = np.asarray(self.values, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InputError("cost must be a square matrix")
        if not np.all(np.isfinite(c)) or c.min() < 0:
            raise InputError("cost must be finite and nonnegative")
        if self.is_pseudo_metric:
            if np.abs(np.diag(c)).max() > TOL or np.abs(c - c.T).max() > TOL:
                raise NotPseudoMetric("pseudo-metric cost must be symmetric with zero diagonal")
            if self.graph is None and c.shape[0] <= 400:
                excess, triple = worst_triangle_violation(c)
                if excess > TOL:
                    raise NotPseudoMetric(f"triangle inequality fails at {triple} by {excess:.3g}")
        object.__setattr__(self, "values", _frozen(c))

    @property
    def size(self) -> int:
        return self.values.shape[0]


def _complete_graph(c: np.ndarray) -> TransshipmentGraph:
    n = c.shape[0]
    i, j = np.nonzero(~np.eye(n, dtype=bool))
    return TransshipmentGraph(n, i, j, c[i, j])


def _line_graph(pos: np.ndarray, scale: float, hub_weight: Optional[float]):
    order = np.argsort(pos, kind="stable")
    a, b = order[:-1], order[1:]
    w = scale * (pos[b] - pos[a])
    tail, head, weight = [a, b], [b, a], [w, w]
    n = pos.size
    n_nodes = n
    if hub_weight is not None:
        hub = np.full(n, n)
        idx = np.arange(n)
        tail += [idx, hub]
        head += [hub, idx]
        weight += [np.full(n, hub_weight)] * 2
        n_nodes = n + 1
    return TransshipmentGraph(n_nodes, np.concatenate(tail), np.concatenate(head), np.concatenate(weight))


def metric_cost(space: MetricSpace) -> CostMatrix:
    pos = space.line_positions
    graph = _line_graph(pos, 1.0, None) if pos is not None else None
    return CostMatrix(space.dist, True, graph)


def capped_lipschitz_cost(space: MetricSpace, A: float, K: float) -> CostMatrix:
    """Cost ``min(2A, K d)``: its 1-Lipschitz functions are exactly those with
    oscillation at most ``2A`` and ``d``-Lipschitz constant at most ``K``."""
    if A < 0 or K < 0 or (A == 0 and K == 0):
        raise NonpositiveParameters(f"need A, K >= 0 and not both zero (A={A}, K={K})")
    c = np.minimum(2.0 * A, K * space.dist)
    pos = space.line_positions
    line = None
    if pos is not None and A > 0:
        graph = _line_graph(pos, K, A)
        order = np.argsort(pos, kind="stable")
        line = (order, K * np.diff(pos[order]), float(A))
    else:
        graph = _complete_graph(c)
    return CostMatrix(c, True, graph, line)


def separating_family(space: MetricSpace, n: int) -> CostMatrix:
    """``d_n(x, y) = min(1, n d(x, y))``, increasing to the discrete metric."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    return capped_lipschitz_cost(space, 0.5, float(n))


def mismatch_cost(size: int) -> CostMatrix:
    """Indicator ``1(x != y)``; transport under it is total variation."""
    c = 1.0 - np.eye(size)
    idx = np.arange(size)
    hub = np.full(size, size)
    graph = TransshipmentGraph(
        size + 1,
        np.concatenate([idx, hub]),
        np.concatenate([hub, idx]),
        np.full(2 * size, 0.5),
    )
    return CostMatrix(c, True, graph)


def far_indicator_cost(space: MetricSpace, eps: float, tol: float = TOL) -> CostMatrix:
    """Indicator ``1(d(x, y) > eps)``; not a pseudo-metric in general."""
    return CostMatrix((space.dist > eps + tol).astype(float), False)

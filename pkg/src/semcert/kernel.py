"""Discrete-time Markov kernels on a :class:`MetricSpace`."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError, NonFiniteValue, NotStochastic, SingularSolve, SpaceMismatch
from .metric_space import Distribution, MetricSpace, as_weights

ROW_TOL = 1e-12
EDGE_THRESHOLD = 1e-15
INVARIANCE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Kernel:
    """Row-stochastic one-step matrix ``matrix[i, j] = P_1(x_i, {x_j})``.

    ``meta`` carries model provenance (e.g. ``{"model": "xi-chain", "truncated": True}``).
    """

    space: MetricSpace
    matrix: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        P = np.array(self.matrix, dtype=float)
        n = self.space.size
        if P.shape != (n, n):
            raise SpaceMismatch(f"matrix shape {P.shape} does not match {n} states")
        if not np.all(np.isfinite(P)):
            raise NonFiniteValue("transition matrix has non-finite entries")
        if P.min() < 0:
            raise NotStochastic(f"negative transition probability {P.min():.3g}")
        err = np.abs(P.sum(axis=1) - 1.0)
        if err.max() > ROW_TOL:
            raise NotStochastic(f"row {int(err.argmax())} sums to 1{err.max():+.3g}")
        P.setflags(write=False)
        object.__setattr__(self, "matrix", P)

    @property
    def size(self) -> int:
        return self.space.size


@dataclass(frozen=True)
class ErgodicDecomposition:
    measures: list
    class_members: list

    def __len__(self):
        return len(self.measures)


def step(kernel: Kernel, t: int) -> Kernel:
    """``P_t`` as a kernel (matrix power by repeated squaring)."""
    t = _check_time(t)
    return Kernel(kernel.space, np.linalg.matrix_power(kernel.matrix, t), dict(kernel.meta))


def push_weights(kernel: Kernel, w: np.ndarray, t: int) -> np.ndarray:
    for _ in range(_check_time(t)):
        w = w @ kernel.matrix
    return w


def push_measure(kernel: Kernel, mu, t: int) -> Distribution:
    """``mu P_t``."""
    w = push_weights(kernel, as_weights(mu, kernel.space), t)
    w = np.clip(w, 0.0, None)
    return Distribution(kernel.space, w / w.sum())


def apply_function(kernel: Kernel, phi, t: int) -> np.ndarray:
    """``(P_t phi)(x_i)`` for ``phi`` given by its values on the states."""
    v = np.asarray(phi, dtype=float)
    if v.shape != (kernel.size,):
        raise SpaceMismatch(f"function of length {v.shape} on {kernel.size} states")
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("function values must be finite")
    for _ in range(_check_time(t)):
        v = kernel.matrix @ v
    return v


def _check_time(t) -> int:
    if int(t) != t or t < 0:
        raise InputError(f"time must be a nonnegative integer, got {t!r}")
    return int(t)


def closed_classes(kernel: Kernel) -> list:
    """Closed communicating classes of the support graph, ordered by smallest member."""
    adj = csr_matrix(kernel.matrix > EDGE_THRESHOLD)
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    members = [np.flatnonzero(labels == c) for c in range(ncomp)]
    # a class is closed when no edge leaves it
    rows, cols = adj.nonzero()
    leaking = np.zeros(ncomp, dtype=bool)
    leaking[labels[rows][labels[rows] != labels[cols]]] = True
    closed = [m for c, m in enumerate(members) if not leaking[c]]
    return sorted(closed, key=lambda m: int(m[0]))


def stationary(P: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible stochastic matrix."""
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        pi = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    s = pi.sum()
    if not np.isfinite(s) or s <= 0:
        raise SingularSolve("stationary solve produced no probability vector")
    pi /= s
    if np.abs(pi @ P - pi).sum() > INVARIANCE_TOL:
        pi = np.clip(np.linalg.lstsq(A, b, rcond=None)[0], 0.0, None)
        pi /= pi.sum()
        if np.abs(pi @ P - pi).sum() > INVARIANCE_TOL:
            raise SingularSolve("stationary solve failed the invariance check")
    return pi


def invariant_measures(kernel: Kernel) -> ErgodicDecomposition:
    """One ergodic invariant measure per closed communicating class."""
    classes = closed_classes(kernel)
    measures = []
    for members in classes:
        sub = kernel.matrix[np.ix_(members, members)]
        sub = sub / sub.sum(axis=1, keepdims=True)
        w = np.zeros(kernel.size)
        w[members] = stationary(sub)
        measures.append(Distribution(kernel.space, w))
    return ErgodicDecomposition(measures, classes)

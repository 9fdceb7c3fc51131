"""Monotone envelope functions and ASF+ certificates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class ConstantF:
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise InputError(f"constant F must be finite and >= 0, got {self.value!r}")

    def __call__(self, u):
        return np.full(np.shape(u), float(self.value)) if np.ndim(u) else float(self.value)

    @property
    def bounded(self) -> bool:
        return True

    def to_dict(self):
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class AffineF:
    """``F(u) = slope * u + intercept``."""

    slope: float
    intercept: float

    def __post_init__(self):
        if self.slope < 0 or self.intercept < 0:
            raise InputError("affine F needs nonnegative slope and intercept")

    def __call__(self, u):
        out = self.slope * np.asarray(u, dtype=float) + self.intercept
        return out if np.ndim(u) else float(out)

    @property
    def bounded(self) -> bool:
        return self.slope == 0

    def to_dict(self):
        return {"type": "affine", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class TableF:
    """Right-continuous step function; constant ``values[0]`` left of the first knot."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size == 0:
            raise InputError("table F needs equally long, non-empty knots and values")
        if np.any(np.diff(k) <= 0):
            raise InputError("table knots must be strictly increasing")
        if np.any(np.diff(v) < 0) or v.min() < 0 or not np.all(np.isfinite(v)):
            raise InputError("table values must be finite, nonnegative and non-decreasing")
        object.__setattr__(self, "knots", tuple(k.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    def __call__(self, u):
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        idx = np.clip(np.searchsorted(k, u, side="right") - 1, 0, None)
        out = v[idx]
        return out if np.ndim(u) else float(out)

    @property
    def bounded(self) -> bool:
        return True

    def to_dict(self):
        return {"type": "table", "knots": list(self.knots), "values": list(self.values)}


def f_from_dict(d: dict):
    kind = d.get("type")
    try:
        if kind == "constant":
            return ConstantF(float(d["value"]))
        if kind == "affine":
            return AffineF(float(d["slope"]), float(d["intercept"]))
        if kind == "table":
            return TableF(tuple(d["knots"]), tuple(d["values"]))
    except KeyError as exc:
        raise InputError(f"F: missing field {exc.args[0]!r}") from None
    raise InputError(f"F.type must be constant, affine or table, got {kind!r}")


def combine(w1: float, F1, w2: float, F2, at: Sequence[float] = ()):
    """``w1 * F1 + w2 * F2``.

    Constants and affine maps combine exactly; anything involving a table is
    tabulated at the knots plus the points ``at``.
    """
    lin = (ConstantF, AffineF)
    if isinstance(F1, lin) and isinstance(F2, lin):
        def parts(F):
            return (0.0, F.value) if isinstance(F, ConstantF) else (F.slope, F.intercept)

        a1, b1 = parts(F1)
        a2, b2 = parts(F2)
        slope, icpt = w1 * a1 + w2 * a2, w1 * b1 + w2 * b2
        return ConstantF(icpt) if slope == 0 else AffineF(slope, icpt)
    pts = set(float(x) for x in at)
    for F in (F1, F2):
        if isinstance(F, TableF):
            pts.update(F.knots)
    knots = np.array(sorted(pts))
    vals = w1 * np.asarray(F1(knots)) + w2 * np.asarray(F2(knots))
    return TableF(tuple(knots), tuple(np.maximum.accumulate(vals)))


@dataclass(frozen=True)
class AsfPlusCertificate:
    """Candidate ``(x0, t_n, delta_n, F)`` for the ASF+ gradient bound.

    ``F_bounded`` is the caller's declaration that ``F`` stays bounded on the
    whole (possibly untruncated) state space.
    """

    x0: int
    times: tuple
    slacks: tuple
    F: object
    F_bounded: bool = False

    def __post_init__(self):
        times = tuple(int(t) for t in self.times)
        slacks = tuple(float(s) for s in self.slacks)
        if not times or len(times) != len(slacks):
            raise InputError("certificate needs equally many times and slacks (at least one)")
        if any(t <= 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
            raise InputError("certificate times must be positive and non-decreasing")
        if any(s < 0 for s in slacks) or any(b > a for a, b in zip(slacks, slacks[1:])):
            raise InputError("certificate slacks must be nonnegative and non-increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "slacks", slacks)

    @property
    def bounded(self) -> bool:
        return bool(self.F_bounded) and self.F.bounded

    def to_dict(self):
        return {
            "x0": self.x0,
            "times": list(self.times),
            "slacks": list(self.slacks),
            "F": self.F.to_dict(),
            "F_bounded": bool(self.F_bounded),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AsfPlusCertificate":
        allowed = {"x0", "times", "slacks", "F", "F_bounded"}
        extra = set(d) - allowed
        if extra:
            raise InputError(f"certificate: unknown field {sorted(extra)[0]!r}")
        missing = allowed - set(d)
        if missing:
            raise InputError(f"certificate: missing field {sorted(missing)[0]!r}")
        if not isinstance(d["F_bounded"], bool):
            raise InputError("certificate: F_bounded must be a boolean")
        return cls(int(d["x0"]), tuple(d["times"]), tuple(d["slacks"]), f_from_dict(d["F"]), d["F_bounded"])


def geometric(scale: float, rate: float):
    """``t -> scale * rate**t``."""
    def r(t):
        return scale * rate ** t
    r.__name__ = f"geometric({scale}, {rate})"
    return r

"""Analytic potentials with their region structure.

All potentials are immutable.  ``evaluate`` follows the physical definition
(barrier edges belong to the outside, ``V(+-q) = 0``); ``inner_value`` and
``inner_slope`` give the one-sided limits from the side of smaller ``|x|``,
which is what the Schroedinger-equation machinery uses at a breakpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "Potential",
    "Free",
    "RectangularBarrier",
    "InfiniteSquareWell",
    "HarmonicOscillator",
    "evaluate",
    "breakpoints",
    "from_dict",
    "to_dict",
]


def _positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")
    return value


class Potential:
    """Common interface.  Subclasses are frozen dataclasses."""

    kind: str = ""
    piecewise_constant: bool = False

    def evaluate(self, x, mass=1.0):
        raise NotImplementedError

    def inner_value(self, x, mass=1.0):
        return self.evaluate(x, mass)

    def inner_slope(self, x, mass=1.0):
        return np.zeros_like(np.asarray(x, dtype=float))

    def breakpoints(self) -> list[float]:
        return []

    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def regions(self):
        """Open intervals ``(lo, hi, V)`` on which a piecewise-constant potential is constant."""
        raise NotImplementedError(f"{self.kind} is not piecewise constant")


@dataclass(frozen=True)
class Free(Potential):
    kind = "free"
    piecewise_constant = True

    def evaluate(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        _check_finite(x)
        out = np.zeros_like(x)
        return out if out.ndim else float(out)

    def regions(self):
        return [(-math.inf, math.inf, 0.0)]


@dataclass(frozen=True)
class RectangularBarrier(Potential):
    U: float
    q: float

    kind = "barrier"
    piecewise_constant = True

    def __post_init__(self):
        object.__setattr__(self, "U", _positive("U", self.U))
        object.__setattr__(self, "q", _positive("q", self.q))

    def evaluate(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        _check_finite(x)
        out = np.where(np.abs(x) < self.q, self.U, 0.0)
        return out if out.ndim else float(out)

    def inner_value(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) <= self.q, self.U, 0.0)
        return out if out.ndim else float(out)

    def breakpoints(self):
        return [-self.q, self.q]

    def regions(self):
        return [(-math.inf, -self.q, 0.0), (-self.q, self.q, self.U), (self.q, math.inf, 0.0)]


@dataclass(frozen=True)
class InfiniteSquareWell(Potential):
    """Zero potential on ``|x| < L`` with impenetrable walls at ``+-L``."""

    L: float

    kind = "well"
    piecewise_constant = True

    def __post_init__(self):
        object.__setattr__(self, "L", _positive("L", self.L))

    def evaluate(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        _check_finite(x)
        if np.any(np.abs(x) >= self.L):
            raise DomainError(f"infinite well is undefined at |x| >= L={self.L}")
        out = np.zeros_like(x)
        return out if out.ndim else float(out)

    def inner_value(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > self.L):
            raise DomainError(f"|x| beyond the well walls at +-{self.L}")
        out = np.zeros_like(x)
        return out if out.ndim else float(out)

    def breakpoints(self):
        return [-self.L, self.L]

    def domain(self):
        return (-self.L, self.L)

    def regions(self):
        return [(-self.L, self.L, 0.0)]


@dataclass(frozen=True)
class HarmonicOscillator(Potential):
    """``V = m omega^2 x^2 / 2``."""

    omega: float

    kind = "harmonic"

    def __post_init__(self):
        object.__setattr__(self, "omega", _positive("omega", self.omega))

    def evaluate(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        _check_finite(x)
        out = 0.5 * mass * self.omega**2 * x * x
        return out if out.ndim else float(out)

    def inner_slope(self, x, mass=1.0):
        x = np.asarray(x, dtype=float)
        out = mass * self.omega**2 * x
        return out if out.ndim else float(out)

    def polynomial(self, mass=1.0):
        """Coefficients ``(v0, v1, v2)`` of ``V = v0 + v1 x + v2 x^2``."""
        return (0.0, 0.0, 0.5 * mass * self.omega**2)


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("potential evaluated at a non-finite coordinate")


def evaluate(potential: Potential, x, mass: float = 1.0):
    """Value of the potential at ``x``."""
    return potential.evaluate(x, mass)


def breakpoints(potential: Potential) -> list[float]:
    """Strictly increasing list of discontinuity / wall locations."""
    return list(potential.breakpoints())


_KINDS = {
    "free": (Free, ()),
    "barrier": (RectangularBarrier, ("U", "q")),
    "well": (InfiniteSquareWell, ("L",)),
    "harmonic": (HarmonicOscillator, ("omega",)),
}


def from_dict(spec: dict) -> Potential:
    """Build a potential from its tagged-record form, e.g. ``{"kind": "barrier", "U": 2, "q": 1}``.

    Unknown keys and missing parameters raise ``ParameterError``.
    """
    if not isinstance(spec, dict):
        raise ParameterError("potential must be a JSON object")
    kind = spec.get("kind")
    if kind not in _KINDS:
        raise ParameterError(f"potential.kind must be one of {sorted(_KINDS)}, got {kind!r}")
    cls, fields = _KINDS[kind]
    extra = set(spec) - {"kind", *fields}
    if extra:
        raise ParameterError(f"potential: unknown keys {sorted(extra)}")
    missing = [f for f in fields if f not in spec]
    if missing:
        raise ParameterError(f"potential: missing {missing}")
    for f in fields:
        if isinstance(spec[f], bool) or not isinstance(spec[f], (int, float)):
            raise ParameterError(f"potential.{f} must be a number")
    return cls(*(spec[f] for f in fields))


def to_dict(potential: Potential) -> dict:
    _, fields = _KINDS[potential.kind]
    return {"kind": potential.kind, **{f: getattr(potential, f) for f in fields}}

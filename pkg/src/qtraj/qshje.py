"""Conjugate momentum, reduced action and the quantum stationary Hamilton-Jacobi equation.

For a microstate ``(a, b, c)`` and a Wronskian-normalized basis (phi, theta):

    W'  = sqrt(2m) / S,            S = a phi^2 + b theta^2 + c phi theta
    W   = hbar * arctan[(b theta/phi + c/2) / sqrt(ab - c^2/4)]   (continuous branch)
    (W')^2/2m + V - E = -(hbar^2 / 4m) <W; x>,   <W; x> = W'''/W' - 3/2 (W''/W')^2

All derivatives are analytic in the basis samples; second and third derivatives of the
basis come from the Schroedinger equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SolutionBasis, schrodinger_residual, wronskian_target
from .errors import NormalizationError, NumericalError, ParameterError

__all__ = [
    "Microstate",
    "ActionRecord",
    "conjugate_momentum",
    "reduced_action",
    "action_derivatives",
    "schwarzian",
    "qshje_residual",
    "substitution_brackets",
    "phase_components",
    "cos_phase",
    "equivalent_microstate",
    "rotation",
]


@dataclass(frozen=True)
class Microstate:
    """Real coefficients selecting one trajectory: ``a, b > 0`` and ``ab - c^2/4 > 0``."""

    a: float
    b: float
    c: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"microstate.{name} must be finite")
            object.__setattr__(self, name, v)
        if not (self.a > 0 and self.b > 0):
            raise ParameterError("microstate requires a > 0 and b > 0")
        if not self.det > 0:
            raise ParameterError("ab − c²/4 must be positive")

    @property
    def det(self) -> float:
        """``ab - c^2/4``."""
        return self.a * self.b - 0.25 * self.c * self.c

    @property
    def symmetric(self) -> bool:
        return self.a == self.b and self.c == 0.0


@dataclass(frozen=True)
class ActionRecord:
    """Reduced action and its first three derivatives at ``x``."""

    W: object
    W1: object
    W2: object
    W3: object


def _scalar_out(arrs, scalar):
    if scalar:
        return tuple(float(a[0]) for a in arrs)
    return arrs


def _require_normalized(basis: SolutionBasis, micro: Microstate):
    if basis.micro is None:
        raise NormalizationError("basis has not been rescaled for a microstate")
    target = wronskian_target(micro, basis.hbar, basis.mass)
    if abs(basis.wronskian**2 / target - 1.0) > 1e-9:
        raise NormalizationError(
            "basis Wronskian does not match the microstate normalization "
            f"(W^2={basis.wronskian**2!r}, required {target!r})"
        )


def _form(basis, micro, x, order):
    """S and its derivatives up to ``order`` (0..2) at array ``x``."""
    s = basis.eval(x, max(order, 1) if order < 2 else 2)
    a, b, c = micro.a, micro.b, micro.c
    p, t = s.phi, s.theta
    S = a * p * p + b * t * t + c * p * t
    out = [S]
    if order >= 1:
        dp, dt = s.dphi, s.dtheta
        out.append(2 * a * p * dp + 2 * b * t * dt + c * (dp * t + p * dt))
    if order >= 2:
        d2p, d2t = s.d2phi, s.d2theta
        out.append(2 * a * (dp * dp + p * d2p) + 2 * b * (dt * dt + t * d2t)
                   + c * (d2p * t + 2 * dp * dt + p * d2t))
    return out


def conjugate_momentum(basis: SolutionBasis, micro: Microstate, x):
    """``W' = sqrt(2m) / (a phi^2 + b theta^2 + c phi theta)``; positive everywhere."""
    _require_normalized(basis, micro)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    (S,) = _form(basis, micro, xa, 0)
    (W1,) = _scalar_out((math.sqrt(2.0 * basis.mass) / S,), scalar)
    return W1


def phase_components(basis: SolutionBasis, micro: Microstate, x):
    """``(X, Y) = (sqrt(det) phi, b theta + c phi / 2)``.

    ``Y / X`` is the arctan argument of the reduced action and ``atan2(Y, X)`` is a
    2 pi-periodic angle that advances continuously through the nulls of phi.
    """
    s = basis.eval(np.atleast_1d(np.asarray(x, dtype=float)), 0)
    return math.sqrt(micro.det) * s.phi, micro.b * s.theta + 0.5 * micro.c * s.phi


def _angle_rate(basis, micro, x):
    (S,) = _form(basis, micro, x, 0)
    return math.sqrt(micro.det) * abs(basis.wronskian) / S


_MAX_PASSES = 60
_MAX_POINTS = 5_000_000


def _unwrapped_angle(basis, micro, x):
    """Continuous ``atan2(Y, X)`` at sorted-or-not points ``x``, branch-fixed at the anchor.

    Samples between the anchor and every requested point are refined until each step
    advances the angle by less than pi/4 (rate bound at both ends and the midpoint) and
    no wrapped step is negative; the angle is monotone, so a negative step means a
    missed pole crossing.
    """
    x0 = basis.x0
    pts = np.unique(np.concatenate([x, [x0]]))
    for _ in range(_MAX_PASSES):
        X, Y = phase_components(basis, micro, pts)
        ang = np.arctan2(Y, X)
        if pts.size == 1:
            break
        mids = 0.5 * (pts[1:] + pts[:-1])
        r = _angle_rate(basis, micro, pts)
        rm = _angle_rate(basis, micro, mids)
        est = np.diff(pts) * np.maximum(np.maximum(r[:-1], r[1:]), rm)
        step = np.angle(np.exp(1j * np.diff(ang)))
        bad = (est > 0.25 * np.pi) | (step < -1e-9)
        if not bad.any():
            break
        nsub = np.where(bad, np.maximum(2, np.ceil(est / (0.125 * np.pi))), 1).astype(np.int64)
        if pts.size + int(nsub.sum()) > _MAX_POINTS:
            raise NumericalError("phase unwrapping needs too many samples")
        extra = [np.linspace(pts[i], pts[i + 1], n + 1)[1:-1] for i, n in
                 zip(np.nonzero(bad)[0], nsub[bad])]
        pts = np.unique(np.concatenate([pts, *extra]))
    else:
        raise NumericalError("phase unwrapping did not converge")
    step = np.angle(np.exp(1j * np.diff(ang)))
    cum = np.concatenate([[0.0], np.cumsum(step)])
    i0 = int(np.searchsorted(pts, x0))
    unwrapped = cum - cum[i0]
    # K = 0: the principal arctan branch holds at the anchor
    X0, Y0 = X[i0], Y[i0]
    ref = math.atan(Y0 / X0) if X0 != 0 else math.copysign(0.5 * math.pi, Y0)
    unwrapped = unwrapped + ref
    return unwrapped[np.searchsorted(pts, x)]


def reduced_action(basis: SolutionBasis, micro: Microstate, x):
    """Continuous, increasing branch of ``hbar arctan[(b theta/phi + c/2)/sqrt(det)]``.

    ``K = 0`` at the basis anchor; each pole of ``theta/phi`` adds ``pi hbar``.
    """
    _require_normalized(basis, micro)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    W = basis.hbar * _unwrapped_angle(basis, micro, xa)
    return float(W[0]) if scalar else W


def cos_phase(basis: SolutionBasis, micro: Microstate, x):
    """``cos(W / hbar)`` on the continuous branch, evaluated without forming ``W``.

    Unwrapping adds multiples of pi to the principal arctan, and every such shift is
    absorbed by taking the cosine of ``atan2(Y, X)`` directly, i.e. ``X / hypot(X, Y)``.
    """
    X, Y = phase_components(basis, micro, x)
    return X / np.hypot(X, Y)


def action_derivatives(basis: SolutionBasis, micro: Microstate, x, with_action: bool = True):
    """:class:`ActionRecord` ``(W, W', W'', W''')``; ``W`` is skipped (NaN) when
    ``with_action`` is false, which avoids the unwrapping pass."""
    _require_normalized(basis, micro)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    S, S1, S2 = _form(basis, micro, xa, 2)
    r2m = math.sqrt(2.0 * basis.mass)
    W1 = r2m / S
    W2 = -r2m * S1 / S**2
    W3 = -r2m * (S2 / S**2 - 2.0 * S1**2 / S**3)
    W = basis.hbar * _unwrapped_angle(basis, micro, xa) if with_action else np.full_like(S, np.nan)
    return ActionRecord(*_scalar_out((W, W1, W2, W3), scalar))


def _schwarzian_from(rec):
    return rec.W3 / rec.W1 - 1.5 * (rec.W2 / rec.W1) ** 2


def schwarzian(basis: SolutionBasis, micro: Microstate, x):
    """``<W; x> = W'''/W' - (3/2)(W''/W')^2``."""
    rec = action_derivatives(basis, micro, x, with_action=False)
    return _schwarzian_from(rec)


def qshje_residual(basis: SolutionBasis, micro: Microstate, x):
    """``(W')^2/2m + V - E + (hbar^2/4m) <W; x>`` (zero for an exact solution)."""
    rec = action_derivatives(basis, micro, x, with_action=False)
    m, hbar = basis.mass, basis.hbar
    V = basis.potential.inner_value(np.asarray(x, dtype=float), m)
    return rec.W1**2 / (2 * m) + V - basis.E + hbar**2 / (4 * m) * _schwarzian_from(rec)


def substitution_brackets(basis: SolutionBasis, micro: Microstate, x):
    """The three brackets of the direct substitution of W' into the QSHJE.

    ``r_phi``, ``r_theta``: ``-hbar^2 psi''/(2m) - (E - V) psi`` using each solution's
    own second derivative; ``r_norm``: ``W^2 hbar^2 (ab - c^2/4) / (2m) - 1`` with the
    pointwise Wronskian.
    """
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    r_phi, r_theta = schrodinger_residual(basis, xa)
    s = basis.eval(xa, 1)
    w = s.phi * s.dtheta - s.dphi * s.theta
    r_norm = w**2 * basis.hbar**2 * micro.det / (2 * basis.mass) - 1.0
    return _scalar_out((r_phi, r_theta, r_norm), scalar)


def rotation(angle: float) -> np.ndarray:
    """Matrix taking (phi, theta) to (cos a phi - sin a theta, sin a phi + cos a theta)."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def equivalent_microstate(micro: Microstate, transform) -> Microstate:
    """Microstate on (phi, theta) reproducing ``micro`` on the pair ``transform @ (phi, theta)``.

    The quadratic form transforms as ``Q -> M^T Q M``; ``det(M) > 0`` keeps the
    Wronskian sign, and the normalization follows because ``det`` scales by ``det(M)^2``.
    """
    M = np.asarray(transform, dtype=float)
    if np.linalg.det(M) <= 0:
        raise ParameterError("basis change must have positive determinant")
    Q = np.array([[micro.a, 0.5 * micro.c], [0.5 * micro.c, micro.b]])
    Qn = M.T @ Q @ M
    return Microstate(Qn[0, 0], Qn[1, 1], Qn[0, 1] + Qn[1, 0])

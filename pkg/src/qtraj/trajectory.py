"""Trajectories in the [x, t] plane from the reduced action.

Jacobi's theorem gives ``t - tau = dW(x; E)/dE``; the derivative is taken by a
five-point central stencil in ``E`` with the basis rebuilt at every stencil energy
around a fixed anchor.  Starting from ``4e-2 |E|`` the step is halved and the stencils
are Romberg-extrapolated (up to eighth order).  A level counts only when its stencils at
``delta`` and ``delta/2`` agree to 1e-6 relative; per point the level with the smallest
extrapolation-error estimate is kept, and refinement stops once round-off makes the
estimate grow.  No qualifying level means non-smooth E-dependence.  The mechanical velocity is ``(dW'/dE)^{-1}``, which differs
from ``W'/m`` unless the microstate is symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .basis import build_basis
from .errors import (BracketError, DifferentiationError, NumericalError, ParameterError,
                     TurningPointError)
from .potential import Free, Potential
from .qshje import Microstate, _unwrapped_angle, equivalent_microstate, phase_components, rotation

__all__ = [
    "TrajectorySample",
    "TrajectoryScenario",
    "IndeterminacyReport",
    "time_of_position",
    "position_of_time",
    "mechanical_velocity",
    "time_slope",
    "sample_trajectory",
    "free_particle_time",
    "free_time_slope",
    "closed_form_phase",
    "anchored_microstate",
    "closed_form_microstate",
    "classical_limit_sweep",
]

_STENCIL = np.array([-2, -1, 1, 2])
_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_RICHARDSON_TOL = 1e-6
_STEP_START = 4e-2  # relative to |E|; large steps keep round-off in W out of t
_STEP_MIN = 1e-6
_ROMBERG_COLUMNS = 3
_ESTIMATE_FINE = 1e-13  # error estimate at which refinement stops early


@dataclass(frozen=True)
class TrajectorySample:
    """Trajectory values on a grid: position, time, conjugate momentum, mechanical velocity."""

    x: np.ndarray
    t: np.ndarray
    W1: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class TrajectoryScenario:
    """Everything ``t(x)`` depends on apart from the microstate."""

    potential: Potential
    E: float
    hbar: float = 1.0
    mass: float = 1.0
    tau: float = 0.0
    x0: float = 0.0


@dataclass(frozen=True)
class IndeterminacyReport:
    """Normalized peak-to-peak oscillation of the free-flight time slope for each hbar."""

    hbar_values: list
    envelope_amplitude: list
    converged: bool
    cosine_coefficient: float = 0.0


def _step(E: float, rel: float) -> float:
    return max(rel * abs(E), 1e-8)


def _basis(potential, E, hbar, mass, micro, x0, extent):
    return build_basis(potential, E, hbar, mass, x0=x0, extent=extent).rescaled(micro)


def _extent(potential, x, x0):
    if potential.piecewise_constant:
        return None
    return float(max(np.max(np.abs(x)), abs(x0))) * 1.05 + 1.0


def _stencil_diff(values_at, E, delta):
    acc = 0.0
    for j, w in zip(_STENCIL, _WEIGHTS):
        acc = acc + w * values_at(E + j * delta)
    return acc / delta


def _checked_derivative(values_at, E, what):
    rel = _STEP_START
    prev = [_stencil_diff(values_at, E, _step(E, rel))]
    shape = np.shape(prev[0])
    best = np.full(shape, np.nan)
    best_est = np.full(shape, np.inf)
    agree = np.full(shape, np.inf)
    todo = np.ones(shape, dtype=bool)
    while todo.any() and 0.5 * rel >= _STEP_MIN:
        rel *= 0.5
        row = [_stencil_diff(values_at, E, _step(E, rel))]
        for j in range(1, min(len(prev) + 1, _ROMBERG_COLUMNS)):
            f = 4.0 ** (j + 1)
            row.append((f * row[j - 1] - prev[j - 1]) / (f - 1.0))
        scale = np.maximum(np.abs(row[-1]), 1.0)
        raw = np.abs(row[0] - prev[0]) / scale
        est = np.abs(row[-1] - row[-2]) / scale
        agree = np.minimum(agree, np.where(todo, raw, np.inf))
        better = todo & (raw <= _RICHARDSON_TOL) & (est < best_est)
        best[better] = row[-1][better]
        best_est[better] = est[better]
        todo &= (est > _ESTIMATE_FINE) & ~(np.isfinite(best_est) & (est > 4.0 * best_est))
        prev = row
    bad = ~np.isfinite(best_est)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DifferentiationError(
            f"{what}: E-derivative not smooth (relative stencil disagreement "
            f"{float(np.ravel(agree)[i]):.3e})"
        )
    return best


def _action_offsets(potential, E, hbar, mass, micro, x, x0):
    """Callable ``E' -> W(x; E') - W(x; E)`` evaluated without cancellation.

    The difference of two unwrapped angles is the small angle between the phase vectors
    (``atan2`` of their cross and dot products) plus the integer number of turns read off
    the unwrapped values.
    """
    ext = _extent(potential, x, x0)
    b0 = _basis(potential, E, hbar, mass, micro, x0, ext)
    X0, Y0 = phase_components(b0, micro, x)
    u0 = _unwrapped_angle(b0, micro, x)

    def at(Ej):
        bj = _basis(potential, Ej, hbar, mass, micro, x0, ext)
        Xj, Yj = phase_components(bj, micro, x)
        uj = _unwrapped_angle(bj, micro, x)
        small = np.arctan2(X0 * Yj - Y0 * Xj, X0 * Xj + Y0 * Yj)
        turns = np.round((uj - u0 - small) / (2 * np.pi))
        return hbar * (small + 2 * np.pi * turns)

    return at


def _check_energy(E, hbar, mass):
    for name, val in (("E", E), ("hbar", hbar), ("mass", mass)):
        if not math.isfinite(val):
            raise ParameterError(f"{name} must be finite")
    if hbar <= 0 or mass <= 0:
        raise ParameterError("hbar and mass must be positive")


def time_of_position(potential: Potential, E: float, hbar: float, mass: float,
                     micro: Microstate, x, tau: float = 0.0, x0: float = 0.0):
    """``tau + dW(x; E)/dE`` (Jacobi's theorem)."""
    _check_energy(E, hbar, mass)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    at = _action_offsets(potential, E, hbar, mass, micro, xa, x0)
    t = tau + _checked_derivative(at, E, "time_of_position")
    return float(t[0]) if scalar else t


def mechanical_velocity(potential: Potential, E: float, hbar: float, mass: float,
                        micro: Microstate, x, x0: float = 0.0):
    """``(dW'(x; E)/dE)^{-1}``; raises :class:`TurningPointError` where the derivative vanishes."""
    _check_energy(E, hbar, mass)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ext = _extent(potential, xa, x0)
    r2m = math.sqrt(2.0 * mass)

    def momentum(Ej):
        b = _basis(potential, Ej, hbar, mass, micro, x0, ext)
        s = b.eval(xa, 0)
        S = micro.a * s.phi**2 + micro.b * s.theta**2 + micro.c * s.phi * s.theta
        return r2m / S

    dW1 = _checked_derivative(momentum, E, "mechanical_velocity")
    tiny = np.abs(dW1) < 1e-14 * np.maximum(np.abs(momentum(E)), 1.0)
    if np.any(tiny):
        i = int(np.argmax(tiny))
        raise TurningPointError("dW'/dE vanishes: turning point", x=float(xa[i]))
    v = 1.0 / dW1
    return float(v[0]) if scalar else v


def time_slope(potential: Potential, E: float, hbar: float, mass: float, micro: Microstate,
               x, step: float = 2e-3, x0: float = 0.0):
    """``dt/dx`` by a five-point stencil in ``x`` over :func:`time_of_position`.

    Independent of :func:`mechanical_velocity`, so ``v * dt/dx = 1`` is a real check of
    Jacobi's theorem.
    """
    xa = np.asarray(x, dtype=float)
    acc = 0.0
    for j, w in zip(_STENCIL, _WEIGHTS):
        acc = acc + w * time_of_position(potential, E, hbar, mass, micro, xa + j * step, 0.0, x0)
    return acc / step


def sample_trajectory(potential: Potential, E: float, hbar: float, mass: float,
                      micro: Microstate, x, tau: float = 0.0, x0: float = 0.0) -> TrajectorySample:
    xa = np.asarray(x, dtype=float)
    t = time_of_position(potential, E, hbar, mass, micro, xa, tau, x0)
    ext = _extent(potential, np.atleast_1d(xa), x0)
    b = _basis(potential, E, hbar, mass, micro, x0, ext)
    s = b.eval(xa, 0)
    W1 = math.sqrt(2.0 * mass) / (micro.a * s.phi**2 + micro.b * s.theta**2 + micro.c * s.phi * s.theta)
    v = mechanical_velocity(potential, E, hbar, mass, micro, xa, x0)
    return TrajectorySample(xa, t, W1, v)


def position_of_time(scenario: TrajectoryScenario, micro: Microstate, t: float,
                     bracket, n_samples: int = 65) -> float:
    """Invert ``t(x)`` on ``bracket`` after checking monotonicity on a sample grid."""
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise BracketError("bracket must satisfy x_lo < x_hi")
    sc = scenario

    def tx(x):
        return time_of_position(sc.potential, sc.E, sc.hbar, sc.mass, micro, x, sc.tau, sc.x0)

    xs = np.linspace(lo, hi, n_samples)
    ts = tx(xs)
    dt = np.diff(ts)
    sgn = np.sign(dt)
    if np.any(sgn == 0) or np.any(sgn != sgn[0]):
        i = int(np.argmax(sgn != sgn[0])) if np.any(sgn != sgn[0]) else int(np.argmax(sgn == 0))
        raise TurningPointError(f"t(x) is not monotone on the bracket; turning near x={xs[i]:.6g}",
                                x=float(xs[i]))
    if not min(ts[0], ts[-1]) <= t <= max(ts[0], ts[-1]):
        raise BracketError(f"t={t} outside [{ts[0]}, {ts[-1]}] reached on the bracket")
    if t == ts[0]:
        return lo
    if t == ts[-1]:
        return hi
    i = int(np.searchsorted(ts if sgn[0] > 0 else -ts, t if sgn[0] > 0 else -t))
    a, b = xs[max(i - 1, 0)], xs[min(i, n_samples - 1)]
    tol = 1e-9 * max(abs(t), 1.0)
    x = brentq(lambda y: tx(y) - t, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(tx(x) - t) > tol:
        raise NumericalError("inversion did not reach the requested accuracy", x=x)
    return float(x)


# --------------------------------------------------------------------------- free particle


def closed_form_phase(micro: Microstate) -> float:
    """Phase of the cosine in the free-flight law: the angle whose cotangent is
    ``c / (a - b)``, on the branch with ``sin >= 0`` (``atan2(a - b, c)``).

    At ``a = b`` this gives 0 for ``c > 0`` and pi for ``c < 0``; with ``c = 0`` as well
    the cosine coefficient vanishes and the phase is irrelevant.
    """
    return math.atan2(micro.a - micro.b, micro.c)


def _cosine_coefficient(micro: Microstate) -> float:
    return math.sqrt((micro.a - micro.b) ** 2 + micro.c**2)


def free_time_slope(micro: Microstate, x, E: float, hbar: float = 1.0, mass: float = 1.0):
    """``(t - t0) / x`` for the free particle, finite at ``x = 0``."""
    if not E > 0:
        raise ParameterError("free flight needs E > 0")
    k = math.sqrt(2.0 * mass * E) / hbar
    rho = _cosine_coefficient(micro)
    den = micro.a + micro.b + rho * np.cos(2.0 * k * np.asarray(x, dtype=float) + closed_form_phase(micro))
    if np.any(den <= 0):
        raise NumericalError("free-flight denominator vanished for a valid microstate")
    return math.sqrt(micro.det) * math.sqrt(2.0 * mass / E) / den


def free_particle_time(micro: Microstate, x, E: float, hbar: float = 1.0, mass: float = 1.0):
    """Closed-form free-particle ``t - t0``.

    ``sqrt(ab - c^2/4) sqrt(2m/E) x / (a + b + rho cos(2 k x + chi))`` with
    ``rho = sqrt((a - b)^2 + c^2)`` and ``chi`` from :func:`closed_form_phase`.  It is
    the Jacobi time for the basis ``(cos(kx + pi/4), sin(kx + pi/4))``; use
    :func:`anchored_microstate` to reproduce it with the anchored ``(cos kx, sin kx)``.
    """
    xa = np.asarray(x, dtype=float)
    t = xa * free_time_slope(micro, xa, E, hbar, mass)
    return float(t) if np.ndim(x) == 0 else t


_SHIFT = rotation(0.25 * math.pi)


def anchored_microstate(micro: Microstate) -> Microstate:
    """Microstate on ``(cos kx, sin kx)`` equivalent to ``micro`` on the quarter-turn
    shifted pair used by the closed-form free-flight law."""
    return equivalent_microstate(micro, _SHIFT)


def closed_form_microstate(micro: Microstate) -> Microstate:
    """Inverse of :func:`anchored_microstate`."""
    return equivalent_microstate(micro, _SHIFT.T)


def classical_limit_sweep(micro: Microstate, E: float, mass: float,
                          hbar_sequence: Sequence[float], x_window,
                          n_samples: int = 4001) -> IndeterminacyReport:
    """Oscillation of the free-flight time slope as hbar decreases.

    For every hbar the slope ``(t - t0)/x`` is sampled over one cosine period
    ``pi hbar / sqrt(2mE)`` starting at ``x_window[0]``; the amplitude is
    ``(max - min) / mean``.  Only the symmetric microstate drives it to zero.
    """
    hs = [float(h) for h in hbar_sequence]
    if not hs or any(h <= 0 or not math.isfinite(h) for h in hs):
        raise ParameterError("hbar_sequence must contain positive values")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ParameterError("hbar_sequence must be strictly decreasing")
    lo, hi = map(float, x_window)
    amps = []
    for h in hs:
        period = math.pi * h / math.sqrt(2.0 * mass * E)
        if lo + period > hi:
            raise ParameterError(f"x_window shorter than one oscillation period at hbar={h}")
        xs = np.linspace(lo, lo + period, n_samples)
        f = free_time_slope(micro, xs, E, h, mass)
        amps.append(float((f.max() - f.min()) / f.mean()))
    converged = all(a < 1e-10 for a in amps)
    return IndeterminacyReport(hs, amps, converged, _cosine_coefficient(micro))

"""Contrast quantities with Bohmian mechanics.

* the quantum potential ``Q = (hbar^2/4m) <W; x>``, cross-checked against
  ``E - V - (W')^2/2m``;
* its free-particle average over one oscillation, ``E (1 - ((a+b)/2)/sqrt(ab - c^2/4))``,
  which stays negative in the classical limit unless the microstate is symmetric;
* the generalized running-wave rewrite ``A exp(iW/hbar) + B exp(-iW/hbar)`` for
  ``|A| != |B|``;
* the divergence-free current ``u grad v - v grad u`` for two real separable solutions
  of the 3D free equation at a common energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .basis import SolutionBasis, build_basis
from .errors import ParameterError
from .potential import Free
from .qshje import Microstate, action_derivatives

__all__ = [
    "QuantumPotentialSample",
    "quantum_potential",
    "classical_q_average",
    "numeric_q_average",
    "running_average_deviation",
    "ansatz_transform",
    "SeparableWave",
    "DivergenceReport",
    "divergence_check",
]


@dataclass(frozen=True)
class QuantumPotentialSample:
    """Quantum potential from the Schwarzian (``Q``) and from the energy balance (``Q_cross``)."""

    x: object
    Q: object
    Q_cross: object


def quantum_potential(basis: SolutionBasis, micro: Microstate, x, E: float = None,
                      V=None) -> QuantumPotentialSample:
    """``Q = (hbar^2/4m) <W; x>`` and ``Q_cross = E - V - (W')^2/2m``.

    ``E`` defaults to the basis energy and ``V`` to the potential at ``x``.
    """
    rec = action_derivatives(basis, micro, x, with_action=False)
    m, hbar = basis.mass, basis.hbar
    E = basis.E if E is None else float(E)
    if V is None:
        V = basis.potential.inner_value(np.asarray(x, dtype=float), m)
    schw = rec.W3 / rec.W1 - 1.5 * (rec.W2 / rec.W1) ** 2
    Q = hbar**2 / (4.0 * m) * schw
    return QuantumPotentialSample(x, Q, E - V - rec.W1**2 / (2.0 * m))


def classical_q_average(micro: Microstate, E: float) -> float:
    """``E (1 - ((a + b)/2) / sqrt(ab - c^2/4))``: minus the variance of the classical
    energy over one oscillation; zero only for ``a = b, c = 0``."""
    if not E > 0:
        raise ParameterError("E must be positive")
    if micro.a == micro.b and micro.c == 0.0:
        return 0.0
    return E * (1.0 - 0.5 * (micro.a + micro.b) / math.sqrt(micro.det))


def numeric_q_average(micro: Microstate, E: float, hbar: float = 1e-3, mass: float = 1.0,
                      window: Tuple[float, float] = None, points_per_period: int = 64) -> float:
    """Average of the free-particle quantum potential over ``window``.

    The default window is one oscillation period ``pi hbar / sqrt(2mE)`` starting at 0.
    Integration is composite Simpson on a uniform grid.
    """
    if not E > 0:
        raise ParameterError("E must be positive")
    period = math.pi * hbar / math.sqrt(2.0 * mass * E)
    lo, hi = (0.0, period) if window is None else map(float, window)
    if not hi > lo:
        raise ParameterError("window must have positive length")
    n = int(math.ceil((hi - lo) / period * points_per_period))
    n += n % 2  # even number of intervals for Simpson
    xs = np.linspace(lo, hi, n + 1)
    basis = build_basis(Free(), E, hbar, mass).rescaled(micro)
    Q = quantum_potential(basis, micro, xs).Q
    return float(simpson(Q, x=xs) / (hi - lo))


def running_average_deviation(micro: Microstate, E: float, hbar: float, mass: float = 1.0,
                              start: float = 0.0, length: float = 1.0,
                              points_per_period: int = 64) -> float:
    """Worst deviation of the running average of Q from :func:`classical_q_average`.

    The running average over ``[start, start + w]`` is taken for every ``w`` in
    ``[length/2, length]``.  Each window ends at a different fraction of a period, so the
    worst case is governed by the incomplete period and shrinks in proportion to hbar.
    """
    if not (E > 0 and hbar > 0 and length > 0):
        raise ParameterError("E, hbar and length must be positive")
    period = math.pi * hbar / math.sqrt(2.0 * mass * E)
    n = int(math.ceil(length / period * points_per_period))
    xs = np.linspace(start, start + length, n + 1)
    basis = build_basis(Free(), E, hbar, mass).rescaled(micro)
    Q = quantum_potential(basis, micro, xs).Q
    running = cumulative_simpson(Q, x=xs, initial=0.0)
    width = xs - start
    late = width >= 0.5 * length
    return float(np.max(np.abs(running[late] / width[late] - classical_q_average(micro, E))))


def ansatz_transform(A: complex, B: complex, W, hbar: float):
    """Reduced action of ``A exp(iW/hbar) + B exp(-iW/hbar)``.

    ``hbar [arg(A e^{iW/hbar} + B e^{-iW/hbar}) - arg(A + B)]`` on the branch continuous
    in ``W`` and zero at ``W = 0``; for real ``A, B`` this is
    ``hbar arctan[((A - B)/(A + B)) tan(W/hbar)]``.  For real coefficients the
    transform with ``(A, -B)`` undoes the one with ``(A, B)``.
    """
    A, B = complex(A), complex(B)
    if not hbar > 0:
        raise ParameterError("hbar must be positive")
    if abs(A) == abs(B):
        raise ParameterError("|A| = |B|: the combination is a standing wave, not a running one")
    scalar = np.ndim(W) == 0
    th = np.asarray(W, dtype=float) / hbar
    # z(th + pi) = -z(th): reduce to (-pi/2, pi/2] and add pi per half-turn
    turns = np.ceil(th / np.pi - 0.5)
    tr = th - turns * np.pi
    z = A * np.exp(1j * tr) + B * np.exp(-1j * tr)
    base = np.angle(z * np.conj(A + B)) if A + B != 0 else np.angle(z) - np.angle(A - B)
    winding = 1.0 if abs(A) > abs(B) else -1.0
    out = hbar * (base + winding * np.pi * turns)
    return float(out) if scalar else out


# --------------------------------------------------------------------------- 3D check


@dataclass(frozen=True)
class SeparableWave:
    """Product ``f_x(k_x x) f_y(k_y y) f_z(k_z z)`` with each ``f`` in {cos, sin};
    ``factors`` holds ``(kind, wavenumber)`` per axis."""

    factors: Tuple[Tuple[str, float], Tuple[str, float], Tuple[str, float]]

    def __post_init__(self):
        if len(self.factors) != 3:
            raise ParameterError("a separable wave needs one factor per axis")
        fs = []
        for kind, k in self.factors:
            if kind not in ("cos", "sin"):
                raise ParameterError(f"factor kind must be 'cos' or 'sin', got {kind!r}")
            fs.append((kind, float(k)))
        object.__setattr__(self, "factors", tuple(fs))

    @property
    def k_squared(self) -> float:
        return sum(k * k for _, k in self.factors)

    def energy(self, hbar: float = 1.0, mass: float = 1.0) -> float:
        return hbar**2 * self.k_squared / (2.0 * mass)

    def _axis(self, i, s):
        kind, k = self.factors[i]
        if kind == "cos":
            return np.cos(k * s), -k * np.sin(k * s)
        return np.sin(k * s), k * np.cos(k * s)

    def value_and_gradient(self, X, Y, Z):
        (fx, dx), (fy, dy), (fz, dz) = self._axis(0, X), self._axis(1, Y), self._axis(2, Z)
        return fx * fy * fz, (dx * fy * fz, fx * dy * fz, fx * fy * dz)


@dataclass(frozen=True)
class DivergenceReport:
    max_divergence: float
    field_scale: float
    spacing: float


def divergence_check(u_spec: SeparableWave, v_spec: SeparableWave, n_points: int = 21,
                     spacing: float = 0.05, origin: Sequence[float] = (0.3, -0.2, 0.1)) -> DivergenceReport:
    """Largest central-difference divergence of ``u grad v - v grad u`` over the interior of
    an ``n_points``^3 lattice with the given spacing, starting at ``origin``.

    The field is evaluated analytically at the lattice nodes; only the divergence is
    discrete, so the result is the O(spacing^2) truncation error.
    """
    ku, kv = u_spec.k_squared, v_spec.k_squared
    if abs(ku - kv) > 1e-12 * max(ku, kv, 1.0):
        raise ParameterError(f"u and v must share the same energy (|k|^2 = {ku} vs {kv})")
    if n_points < 3 or not spacing > 0:
        raise ParameterError("need at least 3 points per axis and a positive spacing")
    axes = [o + spacing * np.arange(n_points) for o in origin]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    u, gu = u_spec.value_and_gradient(X, Y, Z)
    v, gv = v_spec.value_and_gradient(X, Y, Z)
    F = [u * b - v * a for a, b in zip(gu, gv)]
    h2 = 2.0 * spacing
    div = ((F[0][2:, 1:-1, 1:-1] - F[0][:-2, 1:-1, 1:-1])
           + (F[1][1:-1, 2:, 1:-1] - F[1][1:-1, :-2, 1:-1])
           + (F[2][1:-1, 1:-1, 2:] - F[2][1:-1, 1:-1, :-2])) / h2
    scale = float(max(np.max(np.abs(u * g)) for g in gv))
    return DivergenceReport(float(np.max(np.abs(div))), scale, float(spacing))

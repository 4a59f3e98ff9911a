"""Bound states, the microstate reconstruction of the bound solution and action quantization."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .basis import SolutionBasis, _PiecewiseSolution, hermite_basis
from .errors import DomainError, ParameterError
from .potential import HarmonicOscillator, InfiniteSquareWell, Potential
from .qshje import Microstate, conjugate_momentum, cos_phase, reduced_action

__all__ = ["BoundState", "eigen_energy", "bound_basis", "microstate_wave", "action_variable"]


@dataclass(frozen=True, eq=False)
class BoundState:
    """Eigenstate with ``n_nodes`` nodes; ``basis.phi`` is the bound solution and
    ``basis.theta`` an unbound partner (raw scale, rescale per microstate)."""

    potential: Potential
    n_nodes: int
    E: float
    basis: SolutionBasis

    @property
    def hbar(self) -> float:
        return self.basis.hbar

    @property
    def mass(self) -> float:
        return self.basis.mass

    def for_microstate(self, micro: Microstate) -> SolutionBasis:
        return self.basis.rescaled(micro)


def _check_nodes(n_nodes):
    if isinstance(n_nodes, bool) or int(n_nodes) != n_nodes or n_nodes < 0:
        raise ParameterError("n_nodes must be a nonnegative integer")
    return int(n_nodes)


def eigen_energy(potential: Potential, n_nodes: int, hbar: float = 1.0, mass: float = 1.0) -> float:
    """Closed-form eigenvalue of the state with ``n_nodes`` nodes."""
    n = _check_nodes(n_nodes)
    if isinstance(potential, InfiniteSquareWell):
        return (n + 1) ** 2 * math.pi**2 * hbar**2 / (2.0 * mass * (2.0 * potential.L) ** 2)
    if isinstance(potential, HarmonicOscillator):
        return (n + 0.5) * hbar * potential.omega
    raise ParameterError(f"no closed-form eigenvalues for potential kind {potential.kind!r}")


def bound_basis(potential: Potential, n_nodes: int, hbar: float = 1.0, mass: float = 1.0,
                extent: float = None) -> BoundState:
    """Bound solution phi and an unbound partner theta with positive Wronskian.

    Well: ``k = (n+1) pi / (2L)``; ``(cos kx, sin kx)`` for even ``n``,
    ``(sin kx, -cos kx)`` for odd ``n``.  Oscillator: Hermite function and a partner
    integrated from the origin, see :func:`qtraj.basis.hermite_basis`.
    """
    n = _check_nodes(n_nodes)
    if hbar <= 0 or mass <= 0:
        raise ParameterError("hbar and mass must be positive")
    E = eigen_energy(potential, n, hbar, mass)
    if isinstance(potential, HarmonicOscillator):
        return BoundState(potential, n, E, hermite_basis(potential, n, hbar, mass, extent))
    if isinstance(potential, InfiniteSquareWell):
        k = (n + 1) * math.pi / (2.0 * potential.L)
        regions = potential.regions()
        if n % 2 == 0:
            phi = _PiecewiseSolution(regions, E, hbar, mass, 0.0, 1.0, 0.0)
            theta = _PiecewiseSolution(regions, E, hbar, mass, 0.0, 0.0, k)
        else:
            phi = _PiecewiseSolution(regions, E, hbar, mass, 0.0, 0.0, k)
            theta = _PiecewiseSolution(regions, E, hbar, mass, 0.0, -1.0, 0.0)
        basis = SolutionBasis(potential, E, float(hbar), float(mass), 0.0, k, phi, theta,
                              potential.domain(), True)
        return BoundState(potential, n, E, basis)
    raise ParameterError(f"no bound basis for potential kind {potential.kind!r}")


def microstate_wave(bound: BoundState, micro: Microstate, x):
    """``sqrt(S) / sqrt(a - c^2/(4b)) * cos(W/hbar)`` with ``S = a phi^2 + b theta^2 + c phi theta``.

    Reproduces phi of the microstate-rescaled basis for every valid microstate; at a
    node of phi the cosine vanishes, giving 0.
    """
    basis = bound.for_microstate(micro)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    s = basis.eval(xa, 0)
    S = micro.a * s.phi**2 + micro.b * s.theta**2 + micro.c * s.phi * s.theta
    amp = np.sqrt(S) / math.sqrt(micro.a - micro.c**2 / (4.0 * micro.b))
    out = amp * cos_phase(basis, micro, xa)
    return float(out[0]) if scalar else out


_EDGE_MOMENTUM = 1e-8


def action_variable(bound: BoundState, micro: Microstate, half_width: float = None) -> float:
    """``J = 2 * integral of W'`` across the state (both passes of the closed contour).

    Oscillator: over ``[-half_width, half_width]`` (default 8 length units), which must
    reach where ``W' < 1e-8``.  Well: wall to wall; ``half_width`` is ignored.
    """
    basis = bound.for_microstate(micro)
    if isinstance(bound.potential, InfiniteSquareWell):
        lo, hi = -bound.potential.L, bound.potential.L
    else:
        hw = 8.0 if half_width is None else float(half_width)
        if not hw > 0:
            raise ParameterError("half_width must be positive")
        lo, hi = -hw, hw
        if lo < basis.domain[0] or hi > basis.domain[1]:
            raise DomainError(f"half_width {hw} exceeds the tabulated basis domain {basis.domain}")
        edge = conjugate_momentum(basis, micro, np.array([lo, hi]))
        if np.max(edge) >= _EDGE_MOMENTUM:
            raise DomainError(
                f"half_width {hw} too small: W' at the edges is {np.max(edge):.3e} (needs < 1e-8)"
            )
    # the integrand peaks once per node; give quad the node positions
    nodes = _phi_nodes(basis, lo, hi)
    f = lambda x: float(conjugate_momentum(basis, micro, x))
    val, _ = quad(f, lo, hi, points=nodes or None, epsabs=1e-10, epsrel=1e-12, limit=400)
    return 2.0 * val


def _phi_nodes(basis, lo, hi, n=4001):
    xs = np.linspace(lo, hi, n)[1:-1]
    phi = basis.eval(xs, 0).phi
    idx = np.nonzero(np.sign(phi[:-1]) * np.sign(phi[1:]) < 0)[0]
    pts = [float(0.5 * (xs[i] + xs[i + 1])) for i in idx]
    pts += [float(x) for x in xs[phi == 0.0]]
    return sorted(set(pts))


def action_from_phase(bound: BoundState, micro: Microstate, half_width: float = None) -> float:
    """``2 [W(hi) - W(lo)]`` from the unwrapped reduced action (quadrature-free check)."""
    basis = bound.for_microstate(micro)
    if isinstance(bound.potential, InfiniteSquareWell):
        lo, hi = -bound.potential.L, bound.potential.L
    else:
        hw = 8.0 if half_width is None else float(half_width)
        lo, hi = -hw, hw
    W = reduced_action(basis, micro, np.array([lo, hi]))
    return 2.0 * float(W[1] - W[0])

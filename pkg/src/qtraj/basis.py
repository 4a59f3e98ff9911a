"""Independent solution pairs (phi, theta) of the stationary Schroedinger equation.

    -hbar^2 psi'' / (2m) + (V - E) psi = 0,   i.e.   psi'' = q(x) psi,  q = 2m (V - E) / hbar^2

A basis is anchored at ``x0`` by ``phi(x0) = 1, phi'(x0) = 0, theta(x0) = 0,
theta'(x0) = W_raw``.  ``W_raw`` defaults to the local wavenumber
``sqrt(2m |E - V(x0)|) / hbar`` so that in a constant-potential region the pair is the
familiar ``(cos kx, sin kx)`` / ``(cosh kx, sinh kx)``.  Piecewise-constant potentials
get exact closed forms matched with C^1 continuity; polynomial potentials (the
oscillator) are propagated by a Taylor-series kernel, see :mod:`qtraj.kernels`.

A basis can be rescaled for a microstate: both solutions are multiplied by a common
factor so that the squared Wronskian equals ``2m / (hbar^2 (ab - c^2/4))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial import hermite as _herm

from . import kernels
from .errors import DomainError, NumericalError, ParameterError
from .potential import HarmonicOscillator, Potential

__all__ = [
    "BasisSample",
    "SolutionBasis",
    "build_basis",
    "evaluate",
    "wronskian",
    "rescale_for_microstate",
    "schrodinger_residual",
    "wronskian_target",
]


def _finish(a, scalar):
    return float(np.asarray(a).reshape(-1)[0]) if scalar else a


@dataclass(frozen=True)
class BasisSample:
    """Values of phi, theta and requested derivatives at one or many points.

    Derivatives beyond the first come from the Schroedinger equation, never from
    finite differences; fields above the requested order are ``None``.
    """

    phi: object
    theta: object
    dphi: object = None
    dtheta: object = None
    d2phi: object = None
    d2theta: object = None
    d3phi: object = None
    d3theta: object = None


# --------------------------------------------------------------------------- solutions


class _PiecewiseSolution:
    """Closed-form solution on a piecewise-constant potential."""

    def __init__(self, regions, E, hbar, mass, x0, y0, dy0):
        self.regions = regions
        n = len(regions)
        self.kind = []
        self.wave = []
        for _, _, v in regions:
            arg = 2.0 * mass * (E - v)
            if arg > 0:
                self.kind.append(1)
                self.wave.append(math.sqrt(arg) / hbar)
            elif arg < 0:
                self.kind.append(-1)
                self.wave.append(math.sqrt(-arg) / hbar)
            else:
                self.kind.append(0)
                self.wave.append(0.0)
        self.ref = [0.0] * n
        self.A = [0.0] * n
        self.B = [0.0] * n
        j0 = int(self._region_index(np.array([x0]))[0])
        self.ref[j0], self.A[j0], self.B[j0] = x0, y0, dy0
        for j in range(j0 + 1, n):
            b = regions[j - 1][1]
            y, dy, _ = self._local(j - 1, np.array([b]))
            self.ref[j], self.A[j], self.B[j] = b, float(y[0]), float(dy[0])
        for j in range(j0 - 1, -1, -1):
            b = regions[j + 1][0]
            y, dy, _ = self._local(j + 1, np.array([b]))
            self.ref[j], self.A[j], self.B[j] = b, float(y[0]), float(dy[0])

    def _region_index(self, x):
        idx = np.full(x.shape, -1, dtype=np.int64)
        for j, (lo, hi, _) in enumerate(self.regions):
            inside = (x > lo) & (x < hi)
            # a breakpoint belongs to the region on its smaller-|x| side
            inside |= (x == hi) & (hi > 0)
            inside |= (x == lo) & (lo < 0)
            idx[inside & (idx < 0)] = j
        return idx

    def _local(self, j, x):
        t = x - self.ref[j]
        A, B, k = self.A[j], self.B[j], self.wave[j]
        if self.kind[j] == 1:
            c, s = np.cos(k * t), np.sin(k * t)
            y = A * c + B * s / k
            dy = -A * k * s + B * c
            return y, dy, -(k * k) * y
        if self.kind[j] == -1:
            c, s = np.cosh(k * t), np.sinh(k * t)
            y = A * c + B * s / k
            dy = A * k * s + B * c
            return y, dy, (k * k) * y
        y = A + B * t
        return y, np.full_like(t, B), np.zeros_like(t)

    def values(self, x):
        idx = self._region_index(x)
        y = np.empty_like(x)
        dy = np.empty_like(x)
        d2 = np.empty_like(x)
        for j in np.unique(idx):
            if j < 0:
                raise DomainError("point outside every region of the potential")
            m = idx == j
            y[m], dy[m], d2[m] = self._local(int(j), x[m])
        return y, dy, d2


class _TaylorSolution:
    """Solution of psi'' = (p0 + p1 x + p2 x^2) psi tabulated on a uniform node grid."""

    def __init__(self, p0, p1, p2, x0, y0, dy0, lo, hi):
        qmax = max(abs(p0 + p1 * x + p2 * x * x) for x in (lo, hi, x0)) + abs(p0)
        h = min(0.25 / math.sqrt(qmax), (hi - lo) / 16.0) if qmax > 0 else (hi - lo) / 16.0
        n_r = max(1, int(math.ceil((hi - x0) / h)))
        n_l = max(1, int(math.ceil((x0 - lo) / h)))
        right = kernels.taylor_table(p0, p1, p2, x0, y0, dy0, h, n_r)
        left = kernels.taylor_table(p0, p1, p2, x0, y0, dy0, -h, n_l)
        if right is None or left is None:
            raise NumericalError("Taylor propagation did not converge", x=x0)
        self.p = (float(p0), float(p1), float(p2))
        self.h = h
        self.x_start = x0 - n_l * h
        self.ys = np.ascontiguousarray(np.concatenate([left[0][::-1], right[0][1:]]))
        self.dys = np.ascontiguousarray(np.concatenate([left[1][::-1], right[1][1:]]))
        self.lo = self.x_start
        self.hi = x0 + n_r * h
        if not (np.all(np.isfinite(self.ys)) and np.all(np.isfinite(self.dys))):
            bad = int(np.argmin(np.isfinite(self.ys) & np.isfinite(self.dys)))
            raise NumericalError("solution overflowed", x=self.x_start + bad * h)

    def values(self, x):
        res = kernels.taylor_eval(*self.p, self.x_start, self.h, self.ys, self.dys,
                                  np.ascontiguousarray(x, dtype=float))
        if res is None:
            raise NumericalError("Taylor evaluation did not converge")
        return res


class _HermiteSolution:
    """``amp * H_n(xi) exp(-xi^2/2)`` with ``xi = sqrt(alpha) x``."""

    def __init__(self, n, alpha, amp):
        self.alpha = alpha
        self.amp = amp
        self.h0 = _herm.Hermite.basis(n)
        self.h1 = self.h0.deriv()
        self.h2 = self.h1.deriv() if n >= 1 else self.h1

    def values(self, x):
        ra = math.sqrt(self.alpha)
        xi = ra * x
        g = self.amp * np.exp(-0.5 * xi * xi)
        h0, h1, h2 = self.h0(xi), self.h1(xi), self.h2(xi)
        y = g * h0
        dy = ra * g * (h1 - xi * h0)
        d2 = self.alpha * g * (h2 - 2.0 * xi * h1 + (xi * xi - 1.0) * h0)
        return y, dy, d2


# --------------------------------------------------------------------------- basis


@dataclass(frozen=True, eq=False)
class SolutionBasis:
    """A pair (phi, theta) at energy ``E``; immutable, evaluation is pure.

    ``scale`` multiplies both solutions; ``micro`` records the microstate the scale was
    chosen for (``None`` for a raw basis).
    """

    potential: Potential
    E: float
    hbar: float
    mass: float
    x0: float
    wronskian_raw: float
    phi_solution: object
    theta_solution: object
    domain: tuple
    closed_form: bool
    scale: float = 1.0
    micro: Optional[object] = None

    # -- ODE coefficient
    def q(self, x):
        v = self.potential.inner_value(x, self.mass)
        return 2.0 * self.mass * (v - self.E) / self.hbar**2

    def dq(self, x):
        return 2.0 * self.mass * self.potential.inner_slope(x, self.mass) / self.hbar**2

    def _check(self, x):
        lo, hi = self.domain
        if np.any(~np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"x outside the basis domain [{lo}, {hi}]")

    def native(self, x):
        """Scaled ``(phi, dphi, d2phi, theta, dtheta, d2theta)`` with each solution's own
        second derivative (closed-form, Hermite or Taylor series), used by residual checks."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check(x)
        p = self.phi_solution.values(x)
        t = self.theta_solution.values(x)
        s = self.scale
        return tuple(s * v for v in (*p, *t))

    def eval(self, x, order: int = 1) -> BasisSample:
        """Values and derivatives up to ``order`` (0..3)."""
        if order not in (0, 1, 2, 3):
            raise ValueError("order must be 0, 1, 2 or 3")
        scalar = np.ndim(x) == 0
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        phi, dphi, _, theta, dtheta, _ = self.native(xa)
        out = {"phi": phi, "theta": theta}
        if order >= 1:
            out.update(dphi=dphi, dtheta=dtheta)
        if order >= 2:
            q = self.q(xa)
            out.update(d2phi=q * phi, d2theta=q * theta)
        if order >= 3:
            dq = self.dq(xa)
            out.update(d3phi=q * dphi + dq * phi, d3theta=q * dtheta + dq * theta)
        return BasisSample(**{k: _finish(v, scalar) for k, v in out.items()})

    @property
    def wronskian(self) -> float:
        """Wronskian implied by the anchor conditions and the scale."""
        return self.scale**2 * self.wronskian_raw

    def rescaled(self, micro) -> "SolutionBasis":
        target = wronskian_target(micro, self.hbar, self.mass)
        s = target**0.25 / math.sqrt(abs(self.wronskian_raw))
        return replace(self, scale=s, micro=micro)


def wronskian_target(micro, hbar: float, mass: float) -> float:
    """Required squared Wronskian ``2m / (hbar^2 (ab - c^2/4))``."""
    det = micro.a * micro.b - 0.25 * micro.c**2
    if not det > 0:
        raise ParameterError("degenerate microstate: ab - c^2/4 must be positive")
    return 2.0 * mass / (hbar**2 * det)


def _default_extent(potential, E, hbar, mass, x0):
    ell = math.sqrt(hbar / (mass * potential.omega))
    turning = math.sqrt(max(2.0 * E, 0.0) / mass) / potential.omega
    return max(turning + 12.0 * ell, abs(x0) + 4.0 * ell)


def build_basis(potential: Potential, E: float, hbar: float = 1.0, mass: float = 1.0,
                x0: float = 0.0, wronskian_raw: Optional[float] = None,
                extent: Optional[float] = None) -> SolutionBasis:
    """Anchored solution pair at energy ``E``.

    ``extent`` bounds the tabulated domain ``[-extent, extent]`` of integrated bases
    (the oscillator); closed-form bases are defined on the potential's whole domain.
    """
    for name, val in (("E", E), ("hbar", hbar), ("mass", mass), ("x0", x0)):
        if not math.isfinite(val):
            raise ParameterError(f"{name} must be finite")
    if hbar <= 0 or mass <= 0:
        raise ParameterError("hbar and mass must be positive")
    lo, hi = potential.domain()
    if not lo <= x0 <= hi:
        raise DomainError(f"anchor x0={x0} outside the potential domain")
    if wronskian_raw is None:
        v0 = float(potential.inner_value(x0, mass))
        wronskian_raw = math.sqrt(2.0 * mass * abs(E - v0)) / hbar or 1.0
    if not (math.isfinite(wronskian_raw) and wronskian_raw > 0):
        raise ParameterError("wronskian_raw must be positive")

    if potential.piecewise_constant:
        regions = potential.regions()
        phi = _PiecewiseSolution(regions, E, hbar, mass, x0, 1.0, 0.0)
        theta = _PiecewiseSolution(regions, E, hbar, mass, x0, 0.0, wronskian_raw)
        return SolutionBasis(potential, float(E), float(hbar), float(mass), float(x0),
                             float(wronskian_raw), phi, theta, (lo, hi), True)

    if isinstance(potential, HarmonicOscillator):
        X = extent if extent is not None else _default_extent(potential, E, hbar, mass, x0)
        v0, v1, v2 = potential.polynomial(mass)
        f = 2.0 * mass / hbar**2
        p = (f * (v0 - E), f * v1, f * v2)
        phi = _TaylorSolution(*p, x0, 1.0, 0.0, -X, X)
        theta = _TaylorSolution(*p, x0, 0.0, wronskian_raw, -X, X)
        dom = (max(phi.lo, theta.lo), min(phi.hi, theta.hi))
        return SolutionBasis(potential, float(E), float(hbar), float(mass), float(x0),
                             float(wronskian_raw), phi, theta, dom, False)

    raise ParameterError(f"unsupported potential kind {potential.kind!r}")


def hermite_basis(potential: HarmonicOscillator, n: int, hbar: float = 1.0,
                  mass: float = 1.0, extent: Optional[float] = None) -> SolutionBasis:
    """Oscillator eigenbasis: phi is the closed-form bound state with ``n`` nodes, theta
    the unbound partner propagated from the origin.

    Even ``n``: ``phi(0) = 1, theta(0) = 0, theta'(0) = k0``.  Odd ``n``:
    ``phi'(0) = k0, theta(0) = -1, theta'(0) = 0``.  Either way the Wronskian is
    ``k0 = sqrt(2 m E) / hbar``.
    """
    E = (n + 0.5) * hbar * potential.omega
    alpha = mass * potential.omega / hbar
    k0 = math.sqrt(2.0 * mass * E) / hbar
    h0 = _herm.Hermite.basis(n)
    if n % 2 == 0:
        amp = 1.0 / h0(0.0)
        init = (0.0, k0)
    else:
        amp = k0 / (math.sqrt(alpha) * h0.deriv()(0.0))
        init = (-1.0, 0.0)
    X = extent if extent is not None else _default_extent(potential, E, hbar, mass, 0.0)
    v0, v1, v2 = potential.polynomial(mass)
    f = 2.0 * mass / hbar**2
    phi = _HermiteSolution(n, alpha, amp)
    theta = _TaylorSolution(f * (v0 - E), f * v1, f * v2, 0.0, *init, -X, X)
    return SolutionBasis(potential, E, float(hbar), float(mass), 0.0, k0, phi, theta,
                         (theta.lo, theta.hi), False)


def evaluate(basis: SolutionBasis, x, order: int = 1) -> BasisSample:
    return basis.eval(x, order)


def wronskian(basis: SolutionBasis, x):
    """Pointwise ``phi theta' - phi' theta``."""
    s = basis.eval(x, 1)
    return s.phi * s.dtheta - s.dphi * s.theta


def rescale_for_microstate(basis: SolutionBasis, micro) -> SolutionBasis:
    return basis.rescaled(micro)


def schrodinger_residual(basis: SolutionBasis, x):
    """``-hbar^2 psi''/(2m) + (V - E) psi`` for psi in (phi, theta), using each
    solution's native second derivative."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    phi, _, d2phi, theta, _, d2theta = basis.native(xa)
    c = basis.hbar**2 / (2.0 * basis.mass)
    vme = basis.potential.inner_value(xa, basis.mass) - basis.E
    return (_finish(-c * d2phi + vme * phi, scalar), _finish(-c * d2theta + vme * theta, scalar))

"""Sub-barrier transmission with certainty through a rectangular barrier.

The reduced action is built from the transmitted side inward: ``W = hbar k (x - q)``
beyond the barrier, ``hbar arctan[(k/kappa) tanh(kappa (x - q))]`` inside it and the
C^2-continued plane-wave phase before it.  Every region has ``W' = hbar k / G`` with an
amplitude function ``G`` (``|psi|^2 = G / (hbar k)``):

    x > q      G = 1
    |x| <= q   G = cosh^2(kappa y) + r^2 sinh^2(kappa y),   y = x - q,  r = k / kappa
    x < -q     G = N^2 + D^2  with  D + iN = (C + i r S) cos u + (S/r + i C) sin u,
               u = k (x + q),  C = cosh(-2 kappa q),  S = sinh(-2 kappa q)

so ``psi = exp(iW/hbar) / sqrt(W')`` is one running wave with no reflected part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError
from .qshje import ActionRecord

__all__ = [
    "BarrierScenario",
    "ComplexWaveSample",
    "barrier_reduced_action",
    "barrier_action_derivatives",
    "barrier_wave",
    "wave_derivatives",
    "interface_continuity",
    "probability_current",
    "schrodinger_residual",
    "plane_wave_coefficients",
    "printed_coefficient_report",
    "scattering_oracle",
    "resolve_components",
    "inverse_mapping",
]

_LEFT, _INSIDE, _RIGHT = 0, 1, 2


@dataclass(frozen=True)
class BarrierScenario:
    """Barrier of height ``U`` on ``|x| < q`` with a sub-barrier energy ``0 < E < U``."""

    U: float
    q: float
    E: float
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("U", "q", "E", "hbar", "mass"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.q <= 0 or self.hbar <= 0 or self.mass <= 0:
            raise ParameterError("q, hbar and mass must be positive")
        if not 0 < self.E < self.U:
            raise ParameterError("sub-barrier energy required (0 < E < U)")

    @property
    def k(self) -> float:
        return math.sqrt(2.0 * self.mass * self.E) / self.hbar

    @property
    def kappa(self) -> float:
        return math.sqrt(2.0 * self.mass * (self.U - self.E)) / self.hbar

    @property
    def ratio(self) -> float:
        """``k / kappa``."""
        return self.k / self.kappa


@dataclass(frozen=True)
class ComplexWaveSample:
    """Wave function values; ``re`` and ``im`` are arrays (or floats) aligned with ``x``."""

    x: object
    re: object
    im: object

    @property
    def value(self):
        return np.asarray(self.re) + 1j * np.asarray(self.im)


def _regions(scn, x):
    return np.where(x > scn.q, _RIGHT, np.where(x >= -scn.q, _INSIDE, _LEFT))


def _edge_constants(scn):
    a = -2.0 * scn.kappa * scn.q
    return math.cosh(a), math.sinh(a)


def _left_phase0(scn):
    C, S = _edge_constants(scn)
    return math.atan2(scn.ratio * S, C)


def _amplitude(scn, region, x):
    """``(G, G', G'', W/hbar)`` for one region on array ``x``."""
    k, kap, r = scn.k, scn.kappa, scn.ratio
    if region == _RIGHT:
        one = np.ones_like(x)
        return one, 0.0 * one, 0.0 * one, k * (x - scn.q)
    if region == _INSIDE:
        ky = kap * (x - scn.q)
        ch, sh = np.cosh(ky), np.sinh(ky)
        G = ch * ch + r * r * sh * sh
        G1 = kap * (1.0 + r * r) * np.sinh(2.0 * ky)
        G2 = 2.0 * kap * kap * (1.0 + r * r) * np.cosh(2.0 * ky)
        return G, G1, G2, np.arctan(r * np.tanh(ky))
    C, S = _edge_constants(scn)
    u = k * (x + scn.q)
    # G = N^2 + D^2 = P + Q cos(2u - beta) with P^2 - Q^2 = (C^2 - S^2)^2 = 1; written as
    # 1/(P+Q) + 2Q cos^2(v) so the deep minima keep full relative precision and G, G', G''
    # share one rounded argument
    P = 0.5 * ((r * S) ** 2 + (S / r) ** 2) + C * C
    Q = math.hypot(0.5 * S * S * (r * r - 1.0 / r**2), (r + 1.0 / r) * C * S)
    beta = math.atan2((r + 1.0 / r) * C * S, 0.5 * S * S * (r * r - 1.0 / r**2))
    v = u - 0.5 * beta
    cv, sv = np.cos(v), np.sin(v)
    G = 1.0 / (P + Q) + 2.0 * Q * cv * cv
    G1 = -4.0 * Q * k * sv * cv
    G2 = -4.0 * Q * k * k * (cv * cv - sv * sv)
    # the phase of D + iN advances by pi per pi in u; reduce u to (-pi, 0]
    turns = np.ceil(u / np.pi)
    ur = u - turns * np.pi
    Nr = r * S * np.cos(ur) + C * np.sin(ur)
    Dr = C * np.cos(ur) + (S / r) * np.sin(ur)
    p0 = _left_phase0(scn)
    back = np.mod(p0 - np.arctan2(Nr, Dr), 2.0 * np.pi)
    back = np.where(back > 1.5 * np.pi, back - 2.0 * np.pi, back)
    return G, G1, G2, p0 - back + turns * np.pi


def _by_region(scn, x, fn):
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(xa)):
        raise ParameterError("x must be finite")
    reg = _regions(scn, xa)
    out = None
    for j in (_LEFT, _INSIDE, _RIGHT):
        m = reg == j
        if not m.any():
            continue
        vals = fn(j, xa[m])
        if out is None:
            out = [np.empty(xa.shape, dtype=np.result_type(v)) for v in vals]
        for o, v in zip(out, vals):
            o[m] = v
    return out


def _record(scn, G, G1, G2, phase):
    hk = scn.hbar * scn.k
    return (scn.hbar * phase, hk / G, -hk * G1 / G**2, -hk * (G2 / G**2 - 2.0 * G1**2 / G**3))


def barrier_action_derivatives(scn: BarrierScenario, x) -> ActionRecord:
    """``(W, W', W'', W''')`` from the region formulas."""
    scalar = np.ndim(x) == 0
    vals = _by_region(scn, x, lambda j, xs: _record(scn, *_amplitude(scn, j, xs)))
    if scalar:
        vals = [float(v[0]) for v in vals]
    return ActionRecord(*vals)


def barrier_reduced_action(scn: BarrierScenario, x):
    """Continuous, strictly increasing ``W(x)`` with ``W(q) = 0``."""
    return barrier_action_derivatives(scn, x).W


def _wave_parts(scn, j, xs):
    G, G1, G2, phase = _amplitude(scn, j, xs)
    k, hk = scn.k, scn.hbar * scn.k
    psi = np.sqrt(G / hk) * np.exp(1j * phase)
    L = G1 / (2.0 * G) + 1j * k / G
    L2 = L * L + G2 / (2.0 * G) - G1**2 / (2.0 * G**2) - 1j * k * G1 / G**2
    return psi, psi * L, psi * L2


def wave_derivatives(scn: BarrierScenario, x):
    """``(psi, psi', psi'')`` from the amplitude and phase (complex arrays)."""
    scalar = np.ndim(x) == 0
    vals = _by_region(scn, x, lambda j, xs: _wave_parts(scn, j, xs))
    return tuple(complex(v[0]) for v in vals) if scalar else tuple(vals)


def barrier_wave(scn: BarrierScenario, x) -> ComplexWaveSample:
    """``psi = exp(iW/hbar) / sqrt(W')``."""
    psi = wave_derivatives(scn, x)[0]
    return ComplexWaveSample(x, np.real(psi), np.imag(psi))


def _potential(scn, x):
    return np.where(np.abs(x) <= scn.q, scn.U, 0.0)


def schrodinger_residual(scn: BarrierScenario, x):
    """``max |-hbar^2 psi''/2m + (V - E) psi| / (max(|E|, 1) max |psi|)`` on ``x``."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    psi, _, d2 = wave_derivatives(scn, xa)
    res = -scn.hbar**2 / (2.0 * scn.mass) * d2 + (_potential(scn, xa) - scn.E) * psi
    return float(np.max(np.abs(res)) / (max(abs(scn.E), 1.0) * np.max(np.abs(psi))))


def probability_current(scn: BarrierScenario, x):
    """``(hbar/m) Im(conj(psi) psi')``; ``1/m`` everywhere for this wave."""
    psi, d1, _ = wave_derivatives(scn, x)
    return scn.hbar / scn.mass * np.imag(np.conj(psi) * d1)


def interface_continuity(scn: BarrierScenario) -> dict:
    """Two-sided differences (outer minus inner) of W, W', W'' and psi'/psi at ``-q`` and ``+q``."""
    out = {}
    for name, edge, outer in (("minus_q", -scn.q, _LEFT), ("plus_q", scn.q, _RIGHT)):
        xe = np.array([edge])
        o = _record(scn, *_amplitude(scn, outer, xe))
        i = _record(scn, *_amplitude(scn, _INSIDE, xe))
        po, do, _ = _wave_parts(scn, outer, xe)
        pi_, di, _ = _wave_parts(scn, _INSIDE, xe)
        out[name] = {
            "W": float(o[0][0] - i[0][0]),
            "W1": float(o[1][0] - i[1][0]),
            "W2": float(o[2][0] - i[2][0]),
            "log_derivative": float(abs(do[0] / po[0] - di[0] / pi_[0])),
        }
    return out


# --------------------------------------------------------------------------- components


def plane_wave_coefficients(scn: BarrierScenario):
    """``(I, R)`` with ``psi = I exp(ik(x+q)) + R exp(-ik(x+q))`` before the barrier.

    Solved from value and slope continuity at ``x = -q`` against the interior wave.
    """
    psi, d1, _ = _wave_parts(scn, _INSIDE, np.array([-scn.q]))
    k = scn.k
    M = np.array([[1.0, 1.0], [1j * k, -1j * k]])
    I, R = np.linalg.solve(M, np.array([psi[0], d1[0]]))
    return complex(I), complex(R)


def matched_coefficients(scn: BarrierScenario):
    """Closed forms of the solved ``(I, R)``:
    ``I = (hbar k)^{-1/2} [C + (i/2)(k/kappa - kappa/k) S]``,
    ``R = (hbar k)^{-1/2} (i/2)(k/kappa + kappa/k) S``."""
    C, S = _edge_constants(scn)
    r, n = scn.ratio, 1.0 / math.sqrt(scn.hbar * scn.k)
    return n * complex(C, 0.5 * (r - 1.0 / r) * S), n * complex(0.0, 0.5 * (r + 1.0 / r) * S)


def printed_coefficient_report(scn: BarrierScenario) -> dict:
    """Compare the solved plane-wave and reconstruction coefficients with the printed
    readings.

    Entries map a reading to ``(value, |value - solved|)``.  The legible incident
    reading uses ``(k/kappa - kappa/k)``; the reflected amplitude appears once with
    ``(k/kappa + kappa/k)`` and once with ``(k/kappa - kappa/k)``.  The reconstruction
    weights appear with ``cosh(-kappa q)`` where matching gives ``cosh(-2 kappa q)``.
    """
    I, R = plane_wave_coefficients(scn)
    C, S = _edge_constants(scn)
    r, hk = scn.ratio, scn.hbar * scn.k
    n = 1.0 / math.sqrt(hk)
    minus, plus = r - 1.0 / r, r + 1.0 / r
    Ch = math.cosh(-scn.kappa * scn.q)
    readings = {
        "incident_as_printed_identical_ratios": (n * C, I),
        "incident_with_ratio_difference": (n * complex(C, 0.5 * minus * S), I),
        "reflected_with_ratio_sum": (n * 0.5j * plus * S, R),
        "reflected_with_ratio_difference": (n * 0.5j * minus * S, R),
        "incident_weight_on_zeta_plus_printed": (Ch**2 + 0.25 * minus**2 * S**2, hk * abs(I) ** 2),
        "incident_weight_on_zeta_plus_doubled_argument": (C**2 + 0.25 * minus**2 * S**2, hk * abs(I) ** 2),
        "incident_weight_on_zeta_minus_printed": (
            -complex(Ch, 0.5 * minus * S) * 0.5j * minus * S, -hk * I * R),
        "incident_weight_on_zeta_minus_doubled_argument": (
            -complex(C, 0.5 * minus * S) * 0.5j * plus * S, -hk * I * R),
        "reflected_weight_on_zeta_plus_printed": (-0.25 * plus**2 * S**2, -hk * abs(R) ** 2),
        "reflected_weight_on_zeta_minus_printed": (
            complex(Ch, 0.5 * minus * S) * 0.5j * minus * S, hk * R * I),
        "reflected_weight_on_zeta_minus_doubled_argument": (
            complex(C, 0.5 * minus * S) * 0.5j * plus * S, hk * R * I),
    }
    return {key: (complex(v), float(abs(v - ref))) for key, (v, ref) in readings.items()}


def scattering_oracle(scn: BarrierScenario):
    """Standard scattering amplitudes ``(refl, trans)`` for a unit incident wave,
    from the 4x4 matching system in the unknowns (refl, alpha, beta, trans) with
    ``exp(ikx) + refl exp(-ikx) | alpha exp(kappa x) + beta exp(-kappa x) | trans exp(ikx)``."""
    k, kap, q = scn.k, scn.kappa, scn.q
    el, er = np.exp(-1j * k * q), np.exp(1j * k * q)
    ep, em = math.exp(kap * q), math.exp(-kap * q)
    A = np.array([
        [np.exp(1j * k * q), -em, -ep, 0.0],
        [-1j * k * np.exp(1j * k * q), -kap * em, kap * ep, 0.0],
        [0.0, ep, em, -er],
        [0.0, kap * ep, -kap * em, -1j * k * er],
    ], dtype=complex)
    rhs = np.array([-el, -1j * k * el, 0.0, 0.0], dtype=complex)
    refl, _, _, trans = np.linalg.solve(A, rhs)
    return complex(refl), complex(trans)


def textbook_reflectance(scn: BarrierScenario) -> float:
    """``[1 + (2 k kappa / (k^2 + kappa^2))^2 / sinh^2(2 kappa q)]^{-1}``."""
    k, kap = scn.k, scn.kappa
    return 1.0 / (1.0 + (2 * k * kap / (k * k + kap * kap)) ** 2 / math.sinh(2 * kap * scn.q) ** 2)


def resolve_components(scn: BarrierScenario, x) -> dict:
    """Hyperbolic parts inside the barrier and plane-wave parts before it.

    ``interior``: ``(hbar k)^{-1/2} cosh(kappa(x-q))`` and ``i (k/kappa) (hbar k)^{-1/2}
    sinh(kappa(x-q))``, NaN outside ``|x| <= q``.  ``exterior``: ``I exp(ik(x+q))`` and
    ``R exp(-ik(x+q))``, NaN for ``x >= -q``.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    n = 1.0 / math.sqrt(scn.hbar * scn.k)
    inside = np.abs(xa) <= scn.q
    before = xa < -scn.q
    ky = scn.kappa * (xa - scn.q)
    nan = np.full(xa.shape, np.nan + 0j)
    cosh_part = np.where(inside, n * np.cosh(np.where(inside, ky, 0.0)), nan)
    sinh_part = np.where(inside, 1j * scn.ratio * n * np.sinh(np.where(inside, ky, 0.0)), nan)
    I, R = plane_wave_coefficients(scn)
    u = scn.k * (xa + scn.q)
    inc = np.where(before, I * np.exp(1j * u), nan)
    ref = np.where(before, R * np.exp(-1j * u), nan)
    return {"interior": (cosh_part, sinh_part), "exterior": (inc, ref)}


def _plane_to_zeta(scn, pts):
    """Coefficients ``(alpha, beta)`` with ``exp(ik(x+q)) = alpha zeta_+ + beta zeta_-``,
    solved from values at two points."""
    zp = wave_derivatives(scn, pts)[0]
    zm = np.conj(zp)
    M = np.column_stack([zp, zm])
    rhs = np.exp(1j * scn.k * (pts + scn.q))
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) < 64 * np.finfo(float).eps * np.max(np.abs(M)) ** 2:
        raise NumericalError("zeta_+ and zeta_- are numerically dependent at the sample points")
    alpha, beta = np.linalg.solve(M, rhs)
    return complex(alpha), complex(beta)


def inverse_mapping(scn: BarrierScenario, x) -> dict:
    """Express the incident and reflected plane waves through ``zeta_+ = psi`` and
    ``zeta_- = conj(psi)`` before the barrier (``x < -q``).

    Returns ``zeta_plus``, ``zeta_minus``, ``recon_incident``, ``recon_reflected`` and
    the solved weights: ``incident = w_ip zeta_+ + w_im zeta_-`` and
    ``reflected = w_rp zeta_+ + w_rm zeta_-``.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa >= -scn.q):
        raise ParameterError("inverse mapping is defined before the barrier (x < -q)")
    lam = 2.0 * math.pi / scn.k
    pts = np.array([-scn.q - 0.37 * lam, -scn.q - 0.71 * lam])
    alpha, beta = _plane_to_zeta(scn, pts)
    # exp(-ik(x+q)) is the conjugate of exp(ik(x+q)), so its weights are swapped conjugates
    gamma, delta = beta.conjugate(), alpha.conjugate()
    I, R = plane_wave_coefficients(scn)
    zp = wave_derivatives(scn, xa)[0]
    zm = np.conj(zp)
    w = {"w_ip": I * alpha, "w_im": I * beta, "w_rp": R * gamma, "w_rm": R * delta}
    return {
        "zeta_plus": zp,
        "zeta_minus": zm,
        "recon_incident": w["w_ip"] * zp + w["w_im"] * zm,
        "recon_reflected": w["w_rp"] * zp + w["w_rm"] * zm,
        "weights": w,
    }

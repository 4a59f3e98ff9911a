import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings

from qtraj import qshje
from qtraj.basis import build_basis, hermite_basis
from qtraj.errors import NormalizationError, ParameterError
from qtraj.potential import Free, HarmonicOscillator, InfiniteSquareWell, RectangularBarrier
from qtraj.qshje import Microstate

from conftest import microstates, random_microstates


def _free(micro, E=1.3, hbar=1.0, mass=1.0, x0=0.0):
    return build_basis(Free(), E, hbar, mass, x0=x0).rescaled(micro)


@pytest.mark.parametrize("args", [(0, 1, 0), (1, -1, 0), (1, 1, 2), (1, 1, -2.5), (math.nan, 1, 0)])
def test_microstate_validation(args):
    with pytest.raises(ParameterError):
        Microstate(*args)


def test_symmetric_microstate_is_classical():
    E, m = 1.7, 0.8
    micro = Microstate(1.4, 1.4, 0.0)
    b = _free(micro, E, 1.0, m)
    x = np.linspace(-4, 6, 401)
    p = math.sqrt(2 * m * E)
    assert np.max(np.abs(qshje.conjugate_momentum(b, micro, x) - p)) < 1e-12
    assert np.max(np.abs(qshje.reduced_action(b, micro, x) - p * x)) < 1e-11


@settings(max_examples=30, deadline=None)
@given(microstates())
def test_conjugate_momentum_positive_and_action_increasing(micro):
    b = _free(micro)
    x = np.linspace(-10, 10, 2001)
    W1 = qshje.conjugate_momentum(b, micro, x)
    W = qshje.reduced_action(b, micro, x)
    assert np.all(W1 > 0)
    assert np.all(np.diff(W) > 0)
    # K = 0: at the anchor (phi = 1, theta = 0) the action is the principal arctan
    assert qshje.reduced_action(b, micro, 0.0) == pytest.approx(
        math.atan2(0.5 * micro.c, math.sqrt(micro.det)), abs=1e-15)


def test_action_derivatives_match_finite_differences():
    micro = Microstate(2.0, 0.6, 0.5)
    b = build_basis(RectangularBarrier(2.0, 1.0), 3.0).rescaled(micro)
    x = np.linspace(1.2, 3.0, 3601)
    rec = qshje.action_derivatives(b, micro, x)
    h = x[1] - x[0]
    assert np.max(np.abs(np.gradient(rec.W, h)[2:-2] - rec.W1[2:-2])) < 1e-5 * np.max(rec.W1)
    assert np.max(np.abs(np.gradient(rec.W1, h)[2:-2] - rec.W2[2:-2])) < 1e-5 * np.max(np.abs(rec.W2))
    assert np.max(np.abs(np.gradient(rec.W2, h)[2:-2] - rec.W3[2:-2])) < 1e-5 * np.max(np.abs(rec.W3))


def test_unwrapping_through_many_nulls():
    """Across n half-periods of phi the action advances by n pi hbar exactly."""
    micro = Microstate(3.0, 0.2, 0.1)
    E, hbar = 2.0, 0.5
    b = _free(micro, E, hbar)
    k = math.sqrt(2 * E) / hbar
    x0, n = 0.123, 37
    x = np.array([x0, x0 + n * math.pi / k])
    W = qshje.reduced_action(b, micro, x)
    assert W[1] - W[0] == pytest.approx(n * math.pi * hbar, rel=1e-12)


def test_momentum_at_nulls_of_phi():
    micro = Microstate(0.9, 1.6, -0.4)
    b = _free(micro, E=0.5)
    x = np.array([math.pi / 2, 3 * math.pi / 2])
    theta = b.eval(x, 0).theta
    assert np.allclose(qshje.conjugate_momentum(b, micro, x), math.sqrt(2.0) / (1.6 * theta**2), rtol=1e-13)


def test_anchor_shift_is_a_microstate_change():
    """A basis anchored elsewhere is a rotated pair; the equivalent microstate gives the same W'."""
    E = 0.9
    k = math.sqrt(2 * E)
    x0 = 0.37
    micro = Microstate(1.3, 0.5, 0.3)
    shifted = _free(micro, E, x0=x0)
    # (cos k(x - x0), sin k(x - x0)) = rotation(-k x0) applied to (cos kx, sin kx)
    eq = qshje.equivalent_microstate(micro, qshje.rotation(-k * x0))
    plain = _free(eq, E)
    x = np.linspace(-3, 3, 121)
    assert np.allclose(qshje.conjugate_momentum(shifted, micro, x),
                       qshje.conjugate_momentum(plain, eq, x), rtol=1e-12, atol=0)


def test_equivalent_microstate_rejects_reflection():
    with pytest.raises(ParameterError):
        qshje.equivalent_microstate(Microstate(1, 1), np.diag([1.0, -1.0]))


def test_normalization_enforced():
    micro = Microstate(1.0, 2.0, 0.3)
    raw = build_basis(Free(), 1.0)
    with pytest.raises(NormalizationError):
        qshje.conjugate_momentum(raw, micro, 0.0)
    b = raw.rescaled(micro)
    off = replace(b, scale=b.scale * 1.01)
    with pytest.raises(NormalizationError):
        qshje.qshje_residual(off, micro, 0.0)
    # the bracket diagnoses the mis-scaling quantitatively
    _, _, r_norm = qshje.substitution_brackets(off, micro, np.linspace(-1, 1, 5))
    assert np.allclose(r_norm, 1.01**4 - 1.0, rtol=1e-12)


def test_mismatched_microstate_rejected():
    b = _free(Microstate(1.0, 1.0))
    with pytest.raises(NormalizationError):
        qshje.conjugate_momentum(b, Microstate(2.0, 2.0), 0.0)


@pytest.mark.parametrize("case", ["free", "free_below_zero", "barrier", "well", "oscillator"])
def test_qshje_residual_small(case, kernel_impl):
    micros = random_microstates(5, seed=11)
    for micro in micros:
        if case == "free":
            b, x = build_basis(Free(), 1.1, 0.8, 1.3), np.linspace(-6, 6, 601)
        elif case == "free_below_zero":
            b, x = build_basis(Free(), -0.4), np.linspace(-3, 3, 301)
        elif case == "barrier":
            b, x = build_basis(RectangularBarrier(2.0, 1.0), 0.8), np.linspace(-3, 3, 601)
        elif case == "well":
            b, x = build_basis(InfiniteSquareWell(1.0), 3.0), np.linspace(-1, 1, 301)
        else:
            b, x = hermite_basis(HarmonicOscillator(1.0), 2), np.linspace(-4, 4, 401)
        b = b.rescaled(micro)
        res = qshje.qshje_residual(b, micro, x)
        assert np.max(np.abs(res)) < 1e-9 * max(abs(b.E), 1.0)


def test_schwarzian_free_symmetric_is_zero():
    micro = Microstate(1.0, 1.0)
    assert np.max(np.abs(qshje.schwarzian(_free(micro), micro, np.linspace(-2, 2, 9)))) < 1e-13


def test_scalar_outputs():
    micro = Microstate(1.0, 2.0)
    b = _free(micro)
    rec = qshje.action_derivatives(b, micro, 0.4)
    assert all(isinstance(v, float) for v in (rec.W, rec.W1, rec.W2, rec.W3))

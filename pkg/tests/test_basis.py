import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qtraj import basis as bs
from qtraj.errors import DomainError, ParameterError
from qtraj.potential import Free, HarmonicOscillator, InfiniteSquareWell, RectangularBarrier
from qtraj.qshje import Microstate


def test_free_basis_is_cos_sin():
    b = bs.build_basis(Free(), 2.0, hbar=1.0, mass=1.0)
    k = 2.0
    x = np.linspace(-7, 7, 301)
    s = b.eval(x, 3)
    assert np.max(np.abs(s.phi - np.cos(k * x))) < 1e-14
    assert np.max(np.abs(s.theta - np.sin(k * x))) < 1e-14
    assert np.max(np.abs(s.d3theta + k**3 * np.cos(k * x))) < 1e-12
    assert b.wronskian == pytest.approx(k)


def test_negative_energy_free_basis_is_hyperbolic():
    b = bs.build_basis(Free(), -0.5)
    x = np.linspace(-2, 2, 41)
    s = b.eval(x, 1)
    assert np.allclose(s.phi, np.cosh(x), rtol=1e-14)
    assert np.allclose(s.theta, np.sinh(x), rtol=1e-14)


def test_barrier_basis_matches_ode_integration():
    """Transfer matching against an independent adaptive ODE integration."""
    pot = RectangularBarrier(2.0, 1.0)
    b = bs.build_basis(pot, 0.7, x0=-2.0)
    k2 = lambda x: 2.0 * (pot.evaluate(x) - 0.7)
    rhs = lambda x, y: [y[1], k2(x) * y[0]]
    xs = np.linspace(-2.0, 2.5, 46)
    sol = solve_ivp(rhs, (-2.0, 2.5), [1.0, 0.0], t_eval=xs, rtol=1e-12, atol=1e-13,
                    max_step=0.01)
    assert np.max(np.abs(b.eval(xs, 0).phi - sol.y[0])) < 1e-8


def test_barrier_interior_cosh():
    pot = RectangularBarrier(2.0, 1.0)
    b = bs.build_basis(pot, 1.0)
    x = np.linspace(-1, 1, 21)
    assert np.allclose(b.eval(x, 0).phi, np.cosh(math.sqrt(2.0) * x), rtol=1e-14)


def test_pointwise_wronskian_constant_across_breakpoints():
    b = bs.build_basis(RectangularBarrier(3.0, 0.5), 1.2, x0=0.2, wronskian_raw=0.8)
    x = np.linspace(-4, 4, 801)
    w = bs.wronskian(b, x)
    assert np.max(np.abs(w - 0.8)) < 1e-13


def test_oscillator_ground_state_gaussian(kernel_impl):
    # beyond |x| ~ 5 round-off from the growing partner dominates the decaying Gaussian
    b = bs.build_basis(HarmonicOscillator(1.0), 0.5)
    x = np.linspace(-4, 4, 161)
    s = b.eval(x, 1)
    assert np.max(np.abs(s.phi - np.exp(-x**2 / 2))) < 1e-10
    assert np.max(np.abs(bs.wronskian(b, x) - 1.0)) < 1e-10


def test_hermite_basis_wronskian(kernel_impl):
    for n in range(4):
        b = bs.hermite_basis(HarmonicOscillator(1.3), n, hbar=0.9, mass=1.1)
        x = np.linspace(-10, 10, 801)
        w = bs.wronskian(b, x)
        assert np.max(np.abs(w / b.wronskian_raw - 1.0)) < 1e-11


def test_schrodinger_residual_small(kernel_impl):
    b = bs.build_basis(HarmonicOscillator(2.0), 1.7, hbar=1.0, mass=0.5)
    x = np.linspace(-3, 3, 101)
    r_phi, r_theta = bs.schrodinger_residual(b, x)
    s = b.eval(x, 0)
    assert np.max(np.abs(r_phi)) < 1e-10 * np.max(np.abs(s.phi))
    assert np.max(np.abs(r_theta)) < 1e-10 * np.max(np.abs(s.theta))


def test_rescale_hits_target():
    m = Microstate(2.0, 0.7, 0.4)
    b = bs.rescale_for_microstate(bs.build_basis(Free(), 1.3, hbar=0.7, mass=2.0), m)
    assert b.wronskian**2 == pytest.approx(bs.wronskian_target(m, 0.7, 2.0), rel=1e-14)
    assert b.micro == m


def test_domain_and_order_checks():
    b = bs.build_basis(InfiniteSquareWell(1.0), 2.0)
    with pytest.raises(DomainError):
        b.eval(1.5)
    with pytest.raises(ValueError):
        b.eval(0.0, 4)
    with pytest.raises(ParameterError):
        bs.build_basis(Free(), 1.0, hbar=0.0)
    with pytest.raises(DomainError):
        bs.build_basis(InfiniteSquareWell(1.0), 1.0, x0=3.0)


def test_scalar_in_scalar_out():
    b = bs.build_basis(Free(), 1.0)
    s = b.eval(0.3, 2)
    assert isinstance(s.phi, float) and isinstance(s.d2theta, float)
    assert s.phi == pytest.approx(math.cos(math.sqrt(2) * 0.3))

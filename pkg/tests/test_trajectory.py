import math

import numpy as np
import pytest

from qtraj import trajectory as tr
from qtraj.errors import BracketError, DifferentiationError, ParameterError, TurningPointError
from qtraj.potential import Free, RectangularBarrier
from qtraj.qshje import Microstate

from conftest import random_microstates


def test_symmetric_free_flight_is_classical():
    E, m = 1.5, 2.0
    x = np.linspace(0, 5, 51)
    t = tr.time_of_position(Free(), E, 1.0, m, Microstate(1.0, 1.0), x)
    assert np.max(np.abs(t - x * math.sqrt(m / (2 * E)))) < 1e-12


def test_jacobi_matches_closed_form_free_flight():
    x = np.linspace(0, 5, 101)
    for micro in random_microstates(4, seed=3):
        t_num = tr.time_of_position(Free(), 0.8, 1.0, 1.0, tr.anchored_microstate(micro), x)
        t_cf = tr.free_particle_time(micro, x, 0.8)
        assert np.max(np.abs(t_num - t_cf)) < 1e-6


def test_anchored_and_closed_form_microstates_are_inverse():
    micro = Microstate(1.7, 0.4, -0.3)
    back = tr.closed_form_microstate(tr.anchored_microstate(micro))
    assert (back.a, back.b, back.c) == pytest.approx((micro.a, micro.b, micro.c), abs=1e-14)


def test_closed_form_phase_branch():
    assert tr.closed_form_phase(Microstate(2.0, 1.0, 0.0)) == pytest.approx(math.pi / 2)
    assert tr.closed_form_phase(Microstate(1.0, 1.0, 0.5)) == 0.0
    assert tr.closed_form_phase(Microstate(1.0, 1.0, -0.5)) == pytest.approx(math.pi)


@pytest.mark.parametrize("pot,E", [(Free(), 1.2), (RectangularBarrier(2.0, 1.0), 3.0)])
def test_velocity_times_time_slope_is_one(pot, E):
    micro = Microstate(1.5, 0.8, 0.2)
    x = np.linspace(-2.5, 2.5, 11) + 0.013
    v = tr.mechanical_velocity(pot, E, 1.0, 1.0, micro, x)
    dt = tr.time_slope(pot, E, 1.0, 1.0, micro, x)
    assert np.max(np.abs(v * dt - 1.0)) < 1e-5


def test_velocity_differs_from_conjugate_momentum_over_mass():
    micro = Microstate(2.0, 1.0)
    s = tr.sample_trajectory(Free(), 1.0, 1.0, 1.0, micro, np.linspace(0.1, 2.0, 20))
    assert np.max(np.abs(s.v - s.W1)) > 1e-2


def test_tau_shifts_time():
    micro = Microstate(1.2, 0.9, 0.1)
    t0 = tr.time_of_position(Free(), 1.0, 1.0, 1.0, micro, 1.3)
    t1 = tr.time_of_position(Free(), 1.0, 1.0, 1.0, micro, 1.3, tau=2.5)
    assert t1 - t0 == pytest.approx(2.5, abs=1e-12)


def test_position_of_time_round_trip():
    sc = tr.TrajectoryScenario(Free(), 1.0)
    micro = Microstate(1.2, 1.0, 0.1)  # t(x) is monotone up to x ~ 4
    for x in (0.4, 1.1, 1.7):
        t = tr.time_of_position(sc.potential, sc.E, 1.0, 1.0, micro, x)
        assert tr.position_of_time(sc, micro, t, (0.0, 2.0)) == pytest.approx(x, abs=1e-8)


def test_position_of_time_classical_example():
    sc = tr.TrajectoryScenario(Free(), 0.5)
    assert tr.position_of_time(sc, Microstate(1.0, 1.0), 2.0, (0.0, 10.0)) == pytest.approx(2.0, abs=1e-9)


def test_position_of_time_errors():
    sc = tr.TrajectoryScenario(Free(), 1.0)
    micro = Microstate(1.0, 1.0)
    with pytest.raises(BracketError):
        tr.position_of_time(sc, micro, 100.0, (0.0, 5.0))
    with pytest.raises(BracketError):
        tr.position_of_time(sc, micro, 1.0, (2.0, 1.0))


def test_non_monotone_time_rejected():
    """For a strongly asymmetric microstate x / (a + b + rho cos(2kx + chi)) turns back."""
    sc = tr.TrajectoryScenario(Free(), 1.0)
    with pytest.raises(TurningPointError) as info:
        tr.position_of_time(sc, Microstate(2.0, 1.0, 0.3), 1.0, (0.0, 5.0))
    assert info.value.x is not None


def test_energy_validation():
    with pytest.raises(ParameterError):
        tr.time_of_position(Free(), 1.0, 0.0, 1.0, Microstate(1.0, 1.0), 1.0)


def test_non_smooth_energy_dependence_flagged():
    """At the barrier top the interior wavenumber is not differentiable in E."""
    with pytest.raises(DifferentiationError):
        tr.time_of_position(RectangularBarrier(2.0, 1.0), 2.0, 1.0, 1.0, Microstate(1.5, 0.8, 0.2), 2.5)


def test_classical_limit_sweep():
    hs = [2.0**-i for i in range(7)]
    sym = tr.classical_limit_sweep(Microstate(1.0, 1.0), 1.0, 1.0, hs, (0.0, 5.0))
    assert sym.converged and sym.cosine_coefficient == 0.0
    asym = tr.classical_limit_sweep(Microstate(2.0, 1.0), 1.0, 1.0, hs, (0.0, 5.0))
    assert not asym.converged
    amps = np.array(asym.envelope_amplitude)
    assert np.all(np.abs(amps[1:] / amps[:-1] - 1.0) < 0.01)
    # 1/(s + rho cos) spans [1/(s + rho), 1/(s - rho)] around its period mean 1/sqrt(s^2 - rho^2)
    rho, s = 1.0, 3.0
    expected = (1 / (s - rho) - 1 / (s + rho)) * math.sqrt(s * s - rho * rho)
    assert amps[0] == pytest.approx(expected, rel=1e-4)


def test_classical_limit_sweep_validation():
    with pytest.raises(ParameterError):
        tr.classical_limit_sweep(Microstate(1.0, 1.0), 1.0, 1.0, [0.5, 1.0], (0.0, 5.0))
    with pytest.raises(ParameterError):
        tr.classical_limit_sweep(Microstate(1.0, 1.0), 1.0, 1.0, [10.0], (0.0, 1.0))

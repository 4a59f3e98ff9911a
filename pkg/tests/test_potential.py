import math

import numpy as np
import pytest

from qtraj import potential as pot
from qtraj.errors import DomainError, ParameterError


def test_barrier_values_and_edges():
    b = pot.RectangularBarrier(2.0, 1.0)
    x = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    assert np.array_equal(b.evaluate(x), [0, 0, 2, 2, 2, 0, 0])
    # one-sided limit from inside at the edges
    assert np.array_equal(b.inner_value(np.array([-1.0, 1.0])), [2.0, 2.0])
    assert pot.breakpoints(b) == [-1.0, 1.0]
    assert [r[2] for r in b.regions()] == [0.0, 2.0, 0.0]


def test_oscillator_value_and_slope():
    h = pot.HarmonicOscillator(2.0)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(h.evaluate(x, mass=0.5), 0.5 * 0.5 * 4.0 * x**2, rtol=0, atol=0)
    assert np.allclose(h.inner_slope(x, mass=0.5), 0.5 * 4.0 * x)
    assert h.polynomial(0.5) == (0.0, 0.0, 1.0)


def test_well_domain():
    w = pot.InfiniteSquareWell(1.5)
    assert w.domain() == (-1.5, 1.5)
    assert pot.evaluate(w, 0.3) == 0.0
    with pytest.raises(DomainError):
        w.evaluate(1.5)
    with pytest.raises(DomainError):
        w.inner_value(np.array([2.0]))


def test_free_is_zero_everywhere():
    f = pot.Free()
    assert pot.evaluate(f, 1e6) == 0.0
    assert f.domain() == (-math.inf, math.inf)


def test_non_finite_coordinate_rejected():
    with pytest.raises(DomainError):
        pot.HarmonicOscillator(1.0).evaluate(np.nan)


@pytest.mark.parametrize("cls,args", [(pot.RectangularBarrier, (0.0, 1.0)),
                                      (pot.RectangularBarrier, (1.0, -1.0)),
                                      (pot.InfiniteSquareWell, (math.inf,)),
                                      (pot.HarmonicOscillator, (-1.0,))])
def test_invalid_parameters(cls, args):
    with pytest.raises(ParameterError):
        cls(*args)


def test_dict_round_trip():
    for p in (pot.Free(), pot.RectangularBarrier(2, 1), pot.InfiniteSquareWell(1), pot.HarmonicOscillator(3)):
        assert pot.from_dict(pot.to_dict(p)) == p


@pytest.mark.parametrize("spec,fragment", [
    ({"kind": "cliff"}, "kind"),
    ({"kind": "barrier", "U": 1}, "missing"),
    ({"kind": "barrier", "U": 1, "q": 1, "w": 2}, "unknown"),
    ({"kind": "well", "L": "wide"}, "number"),
    ({"kind": "well", "L": True}, "number"),
    ([1, 2], "object"),
])
def test_from_dict_errors(spec, fragment):
    with pytest.raises(ParameterError, match=fragment):
        pot.from_dict(spec)

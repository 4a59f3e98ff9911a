"""Trajectory representation of quantum mechanics: reduced action, quantum stationary
Hamilton-Jacobi equation, tunneling, bound-state microstates and Bohmian contrasts."""
from . import basis, bohm, boundstate, potential, qshje, trajectory, tunneling
from .basis import SolutionBasis, build_basis, rescale_for_microstate
from .boundstate import BoundState, action_variable, bound_basis, eigen_energy, microstate_wave
from .errors import (BracketError, DifferentiationError, DomainError, NormalizationError,
                     NumericalError, ParameterError, QTrajError, TurningPointError)
from .kernels import BACKEND
from .potential import Free, HarmonicOscillator, InfiniteSquareWell, RectangularBarrier
from .qshje import (ActionRecord, Microstate, action_derivatives, conjugate_momentum,
                    qshje_residual, reduced_action, schwarzian, substitution_brackets)
from .tunneling import BarrierScenario, barrier_reduced_action, barrier_wave

__version__ = "0.1.0"

"""Exception hierarchy shared by every qtraj module."""


class QTrajError(Exception):
    """Base class for all qtraj errors."""


class DomainError(QTrajError, ValueError):
    """A coordinate or parameter lies outside the domain of an operation."""


class ParameterError(QTrajError, ValueError):
    """Invalid or non-finite physical parameters."""


class NumericalError(QTrajError, ArithmeticError):
    """A numerical procedure failed (integration, root finding, quadrature)."""

    def __init__(self, message, x=None):
        super().__init__(message if x is None else f"{message} (at x={x!r})")
        self.x = x


class DifferentiationError(NumericalError):
    """Finite-difference derivative in energy failed its Richardson check."""


class TurningPointError(NumericalError):
    """Trajectory has a turning point where the requested quantity is undefined."""


class BracketError(QTrajError, ValueError):
    """Root bracket is invalid: non-monotone, or the target is not enclosed."""


class NormalizationError(ParameterError):
    """Basis is not Wronskian-normalized for the microstate in use."""

"""Exception types.  Each maps onto one CLI exit code (see ``cli``)."""

from ._kernels import ConvergenceFailure


class BoxRobustError(Exception):
    exit_code = 1


class DomainError(BoxRobustError, ValueError):
    """Input violates a mathematical precondition."""


class SignallingInput(DomainError):
    pass


class TooLarge(DomainError):
    pass


class WeightSumMismatch(DomainError):
    pass


class ShapeMismatch(DomainError):
    pass


class ScenarioMismatch(ShapeMismatch):
    pass


class RangeError(DomainError):
    pass


class NotLocal(DomainError):
    pass


class NotUnitTrace(DomainError):
    pass


class NotNormalized(DomainError):
    pass


class NotHermitian(DomainError):
    pass


class InvalidPOVM(DomainError):
    pass


class NoQuantumBoundRegistered(DomainError):
    pass


class NumericalFailure(BoxRobustError, RuntimeError):
    exit_code = 3


class LPInfeasible(NumericalFailure):
    pass


__all__ = [
    "BoxRobustError",
    "ConvergenceFailure",
    "DomainError",
    "InvalidPOVM",
    "LPInfeasible",
    "NoQuantumBoundRegistered",
    "NotHermitian",
    "NotLocal",
    "NotNormalized",
    "NotUnitTrace",
    "NumericalFailure",
    "RangeError",
    "ScenarioMismatch",
    "ShapeMismatch",
    "SignallingInput",
    "TooLarge",
    "WeightSumMismatch",
]

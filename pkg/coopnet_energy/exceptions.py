"""Exception types raised across coopnet_energy."""

from typing import Optional


class CoopnetError(Exception):
    """Base class for all coopnet_energy errors."""


class ValidationError(CoopnetError):
    """A value violates a type or parameter invariant."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ConfigParseError(ValidationError):
    """A config file line could not be parsed."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, key=key)
        self.line = line


class NumericalError(CoopnetError):
    """Base class for failures of the numerical machinery."""


class InfeasibleTargetError(NumericalError):
    """A target BER cannot be reached by the modulation."""


class NoBracketError(NumericalError):
    """Root finder endpoints do not bracket a sign change."""


class NonConvergenceError(NumericalError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


class DegenerateSuccessError(NumericalError):
    """Per-round success probability is too small to give a finite bit energy."""


class TrialBudgetExceededError(NumericalError):
    """A Monte Carlo trial needed more rounds than the configured budget."""


class OutputWriteError(CoopnetError):
    """A result file could not be written."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path

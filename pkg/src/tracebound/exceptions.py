"""
Custom exceptions for tracebound
"""


class TraceboundError(Exception):
    """Base exception for tracebound"""
    pass


class InputError(TraceboundError):
    """Raised when an input value, file or argument is malformed"""
    pass


class UnknownMomentError(InputError):
    """Raised when a polynomial needs a moment that is not known"""

    def __init__(self, monomial: str, message: str = ""):
        self.monomial = monomial
        super().__init__(message or f"unknown moment: {monomial}")


class UnderdeterminedError(InputError):
    """Raised when pole-order constraints leave some expectation undetermined"""
    pass


class SolverError(TraceboundError):
    """Raised when the simplex kernel cannot finish (cycling guard, singular basis)"""
    pass


class ThresholdError(TraceboundError):
    """Raised when a threshold search has no valid bracket"""
    pass


class ConfigurationError(TraceboundError):
    """Raised when there's an issue with configuration"""
    pass

from typing import Optional


class ExpansionError(Exception):
    """Base class for errors raised by ito_fourier."""


class DomainError(ExpansionError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class ContractError(ExpansionError, ValueError):
    """Inputs are individually valid but do not fit together."""


class UnsupportedError(ExpansionError, NotImplementedError):
    """The request is outside the implemented scope."""


class CapacityError(ExpansionError):
    """A truncation search hit its cap before reaching the tolerance."""

    def __init__(self, message: str, achieved: float, p: int, tol: Optional[float] = None):
        super().__init__(message)
        self.achieved = achieved
        self.p = p
        self.tol = tol


class ValidityWarning(UserWarning):
    """The mean-square estimate is used outside its stated validity range."""

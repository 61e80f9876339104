"""Exception hierarchy shared by all dglab modules."""

from __future__ import annotations


class DglabError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(DglabError, ValueError):
    pass


class NonContractiveError(ParameterError):
    """The iteration exponent is <= 1, so the nonlinear recurrence cannot close."""


class GeometryError(DglabError, ValueError):
    pass


class PreconditionError(DglabError, ValueError):
    pass


class ConfigurationError(DglabError, ValueError):
    pass


class DivergenceError(DglabError, ArithmeticError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step

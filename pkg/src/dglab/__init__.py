"""Explicit De Giorgi constant chain and numerical inequality checks for parabolic energy classes.

Modules: :mod:`constants` (explicit constant chain), :mod:`fields` (grid
functions and level sets), :mod:`solver` (rough-coefficient finite
differences), :mod:`iterate` (nonlinear recurrence), :mod:`verify`
(inequality checks), :mod:`corpus` (seeded battery), :mod:`cli`.
"""

from __future__ import annotations

from .constants import ConstantChain, DgParams, PdeParams, dg_constants_from_pde, full_chain
from .errors import (
    ConfigurationError,
    DglabError,
    DivergenceError,
    GeometryError,
    NonContractiveError,
    ParameterError,
    PreconditionError,
)
from .fields import CoefficientField, Cylinder, GridField, GridSpec

__version__ = "0.1.0"

__all__ = [
    "CoefficientField",
    "ConfigurationError",
    "ConstantChain",
    "Cylinder",
    "DgParams",
    "DglabError",
    "DivergenceError",
    "GeometryError",
    "GridField",
    "GridSpec",
    "NonContractiveError",
    "ParameterError",
    "PdeParams",
    "PreconditionError",
    "dg_constants_from_pde",
    "full_chain",
]

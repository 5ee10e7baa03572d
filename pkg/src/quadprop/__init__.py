"""Exact propagators for one-dimensional time-dependent quadratic potentials."""

from .errors import (
    CausticError,
    ConvergenceError,
    IntegrationError,
    NonFiniteError,
    NyquistError,
    ParseError,
    QuadpropError,
    StepSizeError,
    SupportError,
    UnknownIdentifierError,
)
from .propcore import (
    ActionCoefficients,
    Characteristic,
    FluctuationFactor,
    QuadraticPotential,
    action_S,
    build_coefficients,
    build_fluctuation,
    coeff_F,
    coeff_G,
    coeff_J,
    fluctuation,
    propagator_K,
    solve_characteristic,
)
from .timefn import TimeFn, eval_timefn, parse_timefn

__version__ = "0.1.0"

__all__ = [
    "ActionCoefficients",
    "CausticError",
    "Characteristic",
    "ConvergenceError",
    "FluctuationFactor",
    "IntegrationError",
    "NonFiniteError",
    "NyquistError",
    "ParseError",
    "QuadpropError",
    "QuadraticPotential",
    "StepSizeError",
    "SupportError",
    "TimeFn",
    "UnknownIdentifierError",
    "action_S",
    "build_coefficients",
    "build_fluctuation",
    "coeff_F",
    "coeff_G",
    "coeff_J",
    "eval_timefn",
    "fluctuation",
    "parse_timefn",
    "propagator_K",
    "solve_characteristic",
]

"""Quasilinear logistic problem through the dual transform f_kappa."""

from ._quasilog import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    Error,
    NumericError,
    ParseError,
    PreconditionError,
    config_keys,
    f,
    f_prime,
    f_second,
    g,
    h,
    h_inverse,
    inverse_transform,
    keller_osserman,
    minimal_large_solution,
    reaction,
    reaction_derivative,
    run,
    solve,
)

__all__ = [
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "Error",
    "NumericError",
    "ParseError",
    "PreconditionError",
    "config_keys",
    "f",
    "f_prime",
    "f_second",
    "g",
    "h",
    "h_inverse",
    "inverse_transform",
    "keller_osserman",
    "minimal_large_solution",
    "reaction",
    "reaction_derivative",
    "run",
    "solve",
]

__version__ = "0.1.0"

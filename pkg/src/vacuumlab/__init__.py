"""Spectral toolkit for degenerate wave systems with a physical vacuum boundary."""
from .errors import (ConvergenceError, DomainError, PreconditionError, RangeError, ResolutionError,
                     SolverError, VacuumLabError)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "PreconditionError",
    "RangeError",
    "ResolutionError",
    "SolverError",
    "VacuumLabError",
    "__version__",
]

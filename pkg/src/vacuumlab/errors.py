"""Exception types shared by all modules."""


class VacuumLabError(Exception):
    """Base class for every error raised by the package."""


class RangeError(VacuumLabError, ValueError):
    """Argument outside the documented working range."""


class DomainError(VacuumLabError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class PreconditionError(VacuumLabError, ValueError):
    """A documented precondition (model assumption, inequality) is violated."""


class ResolutionError(VacuumLabError, ValueError):
    """The discretization cannot represent the requested quantity."""


class ConvergenceError(VacuumLabError, RuntimeError):
    """An iterative procedure failed; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SolverError(VacuumLabError, RuntimeError):
    """A time integration or linear solve failed; carries the failure time."""

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state

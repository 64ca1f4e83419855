"""Exception hierarchy shared by all modules."""


class OrliczError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(OrliczError, ValueError):
    """A constructor received parameters outside their admissible domain."""


class DomainError(OrliczError, ValueError):
    """A function was evaluated outside its domain."""


class ConfigurationError(OrliczError, ValueError):
    """Inconsistent or incomplete configuration."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class EvaluationError(OrliczError, ArithmeticError):
    """Numerical evaluation failed (quadrature, bracketing, ...)."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)


class OverflowGuardError(EvaluationError):
    """Argument exceeds the working range of an exponential N-function."""


class SolverError(OrliczError, RuntimeError):
    """Base class for solver failures; carries the iteration trace."""

    def __init__(self, message, trace=None, **info):
        self.trace = list(trace) if trace is not None else []
        self.info = info
        super().__init__(message)


class NonConvergenceError(SolverError):
    pass


class GeometryError(SolverError):
    """Mountain-pass or concave-convex geometry could not be established."""


class BoundaryMinimizerError(SolverError):
    """Ball-constrained minimization stalled on the boundary sphere."""

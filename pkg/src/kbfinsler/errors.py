"""Exception hierarchy shared by every module of the workbench."""


class FinslerError(Exception):
    """Base class for all workbench errors."""


class DomainError(FinslerError, ValueError):
    """Evaluation requested outside the smoothness domain of a metric or primitive."""


class OrderError(FinslerError, ValueError):
    """Derivative order beyond what a jet carries (hard cap: 4)."""


class DimensionError(FinslerError, ValueError):
    """Vector or array of the wrong size for the complex dimension."""


class ParamError(FinslerError, ValueError):
    """Catalog constructor parameters outside their admissible range."""


class SingularMetricError(FinslerError, ArithmeticError):
    """Fundamental tensor not positive definite or too ill-conditioned to invert."""

    def __init__(self, message, min_eigenvalue=None, condition=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.condition = condition


class StiffnessError(FinslerError, ArithmeticError):
    """Step-doubling error estimate of the integrator exceeded its bound."""


class HypothesisError(FinslerError):
    """A transformation law was requested where its hypothesis fails."""

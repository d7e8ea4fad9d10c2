"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or argument lies outside its documented domain."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its refinement budget.

    Carries the best available estimate so callers can still inspect it.
    """

    def __init__(self, message, estimate, error_estimate):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class ConsistencyError(RuntimeError):
    """An internal cross-check failed, which points at an evaluator bug."""


class DegenerateModelError(RuntimeError):
    """The process is degenerate (non-positive variance, failed hypotheses)."""


class EmbeddingError(RuntimeError):
    """Circulant embedding produced materially negative eigenvalues."""


class FactorizationError(RuntimeError):
    """The coefficient covariance matrix is not positive definite."""

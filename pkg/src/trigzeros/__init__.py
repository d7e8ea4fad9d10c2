"""Expected real zeros of random trigonometric polynomials whose Gaussian
coefficients are stationarily correlated.

The package computes the expected zero count of
f(t) = sum_{k=1}^n a_k cos(kt) + b_k sin(kt) through the Kac-Rice integral,
exposes the correlation models and smoothing kernels behind it, and checks
the numbers independently by Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .correlation import (CorrelationModel, HypothesisReport, ModelKind,
                          correlation, spectral_density, validate_hypotheses)
from .covariance import (CovarianceTriple, convolution_residual,
                         covariance_triple, cross_covariance,
                         derivative_variance, variance)
from .errors import (ConsistencyError, DegenerateModelError, DomainError,
                     EmbeddingError, FactorizationError, QuadratureError)
from .kacrice import (LIMIT_RATIO, LimitRow, ZeroCountEstimate, edge_bound,
                      expected_zeros, integrand, normalized_limit_table)
from .kernels import (KernelFamily, KernelKind, fejer, fejer_derivative,
                      kernel_tail_mass, second_moment_kernel,
                      second_moment_tail_envelope)
from .quadrature import QuadratureConfig
from .sampler import (CoefficientDraw, RootCountConfig, TangencyWarning,
                      count_zeros, draw_coefficients, draw_for_trial,
                      evaluate_polynomial, monte_carlo_zero_mean)

__all__ = [
    "__version__",
    "CorrelationModel", "HypothesisReport", "ModelKind",
    "correlation", "spectral_density", "validate_hypotheses",
    "CovarianceTriple", "variance", "derivative_variance",
    "cross_covariance", "covariance_triple", "convolution_residual",
    "KernelFamily", "KernelKind", "fejer", "fejer_derivative",
    "second_moment_kernel", "second_moment_tail_envelope", "kernel_tail_mass",
    "QuadratureConfig", "ZeroCountEstimate", "LimitRow", "LIMIT_RATIO",
    "integrand", "expected_zeros", "normalized_limit_table", "edge_bound",
    "CoefficientDraw", "RootCountConfig", "TangencyWarning",
    "draw_coefficients", "draw_for_trial", "evaluate_polynomial",
    "count_zeros", "monte_carlo_zero_mean",
    "DomainError", "QuadratureError", "ConsistencyError",
    "DegenerateModelError", "EmbeddingError", "FactorizationError",
]

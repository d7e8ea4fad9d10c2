"""Expected zero counts through the Kac-Rice integral.

For a centred Gaussian process the expected number of zeros on an interval
is (1/pi) times the integral of sqrt((var_f * var_fprime - cov^2) / var_f^2).
The integrand is a smooth periodic function for every finite degree, but it
develops steep boundary layers of width ~1/n near the period endpoints for
long-memory models, so the default quadrature grades its panels toward the
endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .correlation import CorrelationModel, cached_hypothesis_report
from .covariance import moments
from .errors import ConsistencyError, DegenerateModelError, DomainError
from .quadrature import QuadratureConfig, integrate

TWO_PI = 2.0 * math.pi

# the n -> infinity limit of (expected zeros on a full period) / n
LIMIT_RATIO = 2.0 / math.sqrt(3.0)

# discriminants down to -CLAMP * var_f * var_fprime are treated as rounding
# and clamped to zero; anything more negative is an evaluator bug
_DISC_CLAMP = 1e-12

DEFAULT_QUAD = QuadratureConfig(panels=64, points_per_panel=16, grading=2.0,
                                max_refinements=10, rel_tol=1e-9)


@dataclass(frozen=True)
class ZeroCountEstimate:
    """Quadrature value of the Kac-Rice integral with its error estimate."""

    value: float
    error_estimate: float
    interval: tuple[float, float]
    n: int


@dataclass(frozen=True)
class LimitRow:
    """One degree in a normalized-count table."""

    n: int
    value: float
    error_estimate: float
    ratio: float


def integrand_values(model: CorrelationModel, n: int, ts: np.ndarray) -> np.ndarray:
    """(var_f * var_fprime - cov^2) / var_f^2 on an array of points."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    var, dvar, cov = moments(model, n, ts)
    if np.any(var <= 0.0):
        raise DegenerateModelError(
            f"non-positive variance for {model.label} at degree {n}")
    disc = var * dvar - cov * cov
    floor = -_DISC_CLAMP * var * dvar
    bad = disc < floor
    if np.any(bad):
        worst = float(np.min(disc / (var * dvar)))
        raise ConsistencyError(
            f"discriminant below the rounding floor (min relative {worst:.3e})")
    disc = np.maximum(disc, 0.0)
    return disc / (var * var)


def integrand(model: CorrelationModel, n: int, t: float) -> float:
    """Scalar Kac-Rice integrand (before the square root)."""
    return float(integrand_values(model, n, np.asarray([t]))[0])


def _check_interval(interval: Sequence[float]) -> tuple[float, float]:
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 <= lo < hi <= TWO_PI):
        raise DomainError("interval must satisfy 0 <= lo < hi <= 2*pi")
    return lo, hi


def expected_zeros(model: CorrelationModel, n: int, interval: Sequence[float],
                   quad: QuadratureConfig | None = None) -> ZeroCountEstimate:
    """Expected number of real zeros of the degree-n polynomial on interval."""
    lo, hi = _check_interval(interval)
    if quad is None:
        quad = DEFAULT_QUAD

    def f(ts: np.ndarray) -> np.ndarray:
        return np.sqrt(integrand_values(model, n, ts))

    value, error = integrate(f, lo, hi, quad)
    value /= math.pi
    error /= math.pi
    cap = 2.0 * n + error + 1e-9 * (2.0 * n + 1.0)
    if value > cap:
        raise ConsistencyError(
            f"expected zeros {value:.6f} exceeds the hard cap 2n = {2 * n}")
    return ZeroCountEstimate(value=value, error_estimate=error,
                             interval=(lo, hi), n=int(n))


def normalized_limit_table(model: CorrelationModel, degrees: Sequence[int],
                           interval: Sequence[float] = (0.0, TWO_PI),
                           quad: QuadratureConfig | None = None) -> list[LimitRow]:
    """Rows (n, expected zeros, error, expected zeros / n) over degrees."""
    degrees = [int(n) for n in degrees]
    if not degrees or any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise DomainError("degrees must be a strictly increasing sequence")
    rows = []
    for n in degrees:
        est = expected_zeros(model, n, interval, quad)
        rows.append(LimitRow(n=n, value=est.value,
                             error_estimate=est.error_estimate,
                             ratio=est.value / n))
    return rows


def edge_bound(model: CorrelationModel, n: int, eps: float) -> float:
    """Upper bound n * C * sqrt(eps) for expected zeros within eps of the
    period endpoints, with C^2 = 2 ||psi||_1 / (pi * inf psi)."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("n must be a positive integer")
    if not 0.0 < eps <= 0.5:
        raise DomainError("eps must lie in (0, 0.5]")
    report = cached_hypothesis_report(model)
    if not report.passes:
        raise DegenerateModelError(
            f"{model.label} fails the spectral hypotheses, no edge bound")
    c = math.sqrt(2.0 * report.l1_norm / (math.pi * report.infimum))
    return n * c * math.sqrt(eps)

"""Second-order structure of the random trigonometric polynomial.

For f(t) = sum_{k=1}^n a_k cos(kt) + b_k sin(kt) with stationarily
correlated standard Gaussian coefficients, the variance of f(t), the
variance of f'(t) and their cross-covariance are finite cosine/sine sums
in the lag correlations.  The same three moments are, equivalently,
periodic convolutions of the spectral density with the Fejer kernel, the
second-moment kernel and the Fejer derivative; convolution_residual
measures how well the two routes agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .correlation import CorrelationModel, correlation, spectral_density
from .errors import ConsistencyError, DomainError
from .quadrature import QuadratureConfig, integrate

TWO_PI = 2.0 * math.pi

# relative slack allowed on the Cauchy-Schwarz inequality before the
# evaluators are declared inconsistent
_CS_SLACK = 1e-10

_CHUNK = 2_000_000


@dataclass(frozen=True)
class CovarianceTriple:
    """Pointwise moments (Var f(t), Var f'(t), Cov(f(t), f'(t)))."""

    var_f: float
    var_fprime: float
    cov_cross: float
    t: float
    n: int


def _check_degree(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("n must be a positive integer")


@lru_cache(maxsize=256)
def _weights(model: CorrelationModel, n: int):
    """Lag weights for the three direct sums at degree n.

    Index r runs over 1..n-1; the r = n term of the Fejer weight vanishes.
    The inner sum sum_{k<=n-r} k (r+k) is assembled in int64, which is exact
    for every degree this package targets.
    """
    r = np.arange(1, n, dtype=np.int64)
    rho = np.atleast_1d(correlation(model, r)) if n > 1 else np.zeros(0)
    m = n - r
    inner = r * (m * (m + 1)) // 2 + m * (m + 1) * (2 * m + 1) // 6
    fejer_w = (1.0 - r / n) * rho
    second_w = rho * inner.astype(float) / n
    cross_w = fejer_w * r
    peak = (n + 1.0) * (2.0 * n + 1.0) / 6.0
    return r.astype(float), fejer_w, second_w, cross_w, peak


def variance(model: CorrelationModel, n: int, t: float) -> float:
    """Var f(t) = 1 + 2 sum_{r<n} (1 - r/n) rho(r) cos(rt)."""
    _check_degree(n)
    r, fejer_w, _, _, _ = _weights(model, n)
    terms = fejer_w * np.cos(r * t)
    # smallest Fejer weights (largest lags) enter the compensated sum first
    return 1.0 + 2.0 * math.fsum(terms[::-1].tolist())


def derivative_variance(model: CorrelationModel, n: int, t: float) -> float:
    """Var f'(t); the constant term is (n+1)(2n+1)/6."""
    _check_degree(n)
    r, _, second_w, _, peak = _weights(model, n)
    terms = second_w * np.cos(r * t)
    return peak + 2.0 * math.fsum(terms[::-1].tolist())


def cross_covariance(model: CorrelationModel, n: int, t: float) -> float:
    """Cov(f(t), f'(t)) = -sum_{r<n} (1 - r/n) rho(r) r sin(rt)."""
    _check_degree(n)
    r, _, _, cross_w, _ = _weights(model, n)
    terms = cross_w * np.sin(r * t)
    return -math.fsum(terms[::-1].tolist())


def covariance_triple(model: CorrelationModel, n: int, t: float) -> CovarianceTriple:
    """All three moments at once, with a Cauchy-Schwarz consistency check."""
    var_f = variance(model, n, t)
    var_fprime = derivative_variance(model, n, t)
    cov = cross_covariance(model, n, t)
    bound = var_f * var_fprime
    if cov * cov > bound * (1.0 + _CS_SLACK):
        raise ConsistencyError(
            f"Cauchy-Schwarz violated at t={t}: cov^2={cov * cov:.6e} "
            f"exceeds var product {bound:.6e}")
    return CovarianceTriple(var_f=var_f, var_fprime=var_fprime,
                            cov_cross=cov, t=float(t), n=int(n))


def moments(model: CorrelationModel, n: int, ts: np.ndarray):
    """Vectorized (var_f, var_fprime, cov_cross) over an array of t values."""
    _check_degree(n)
    ts = np.asarray(ts, dtype=float)
    r, fejer_w, second_w, cross_w, peak = _weights(model, n)
    var = np.empty_like(ts)
    dvar = np.empty_like(ts)
    cov = np.empty_like(ts)
    if n == 1:
        var.fill(1.0)
        dvar.fill(peak)
        cov.fill(0.0)
        return var, dvar, cov
    step = max(1, _CHUNK // n)
    for start in range(0, ts.size, step):
        sl = slice(start, min(start + step, ts.size))
        phase = r[:, None] * ts[sl][None, :]
        c = np.cos(phase)
        s = np.sin(phase)
        var[sl] = 1.0 + 2.0 * (fejer_w @ c)
        dvar[sl] = peak + 2.0 * (second_w @ c)
        cov[sl] = -(cross_w @ s)
    return var, dvar, cov


# abs_tol keeps identically-zero integrals (e.g. the iid cross term) from
# chasing an unreachable relative target
_SMOOTH_CONV_QUAD = QuadratureConfig(panels=64, points_per_panel=16, grading=1.0,
                                     max_refinements=10, rel_tol=1e-12, abs_tol=1e-12)
_SINGULAR_CONV_QUAD = QuadratureConfig(panels=96, points_per_panel=16, grading=2.0,
                                       max_refinements=9, rel_tol=1e-8, abs_tol=1e-9)


def _convolve(kernel_fn, model: CorrelationModel, t: float,
              quad: QuadratureConfig) -> float:
    """(1/2pi) int_0^{2pi} kernel(x) psi(t - x mod 2pi) dx.

    For densities that blow up at lattice points the integral is split at
    x = t and each piece graded toward its endpoints, so the mesh shrinks
    geometrically into the (integrable) singularity.
    """

    def integrand(xs: np.ndarray) -> np.ndarray:
        arg = np.mod(t - xs, TWO_PI)
        # rounding can land exactly on the excluded lattice point; only the
        # smooth densities ever get here, and they are continuous at 0
        arg[arg == 0.0] = 1e-12
        return np.atleast_1d(kernel_fn(xs)) * np.atleast_1d(spectral_density(model, arg))

    if model.density_singular_at_endpoints and 0.0 < t < TWO_PI:
        left, _ = integrate(integrand, 0.0, t, quad)
        right, _ = integrate(integrand, t, TWO_PI, quad)
        return (left + right) / TWO_PI
    value, _ = integrate(integrand, 0.0, TWO_PI, quad)
    return value / TWO_PI


def convolution_residual(model: CorrelationModel, n: int, t: float,
                         quad: QuadratureConfig | None = None) -> tuple[float, float, float]:
    """Absolute gaps between the direct sums and their convolution forms.

    Returns |var - K*psi|, |var' - peak * (L*psi)| and
    |cov - (1/2) K'*psi| at the point t.
    """
    _check_degree(n)
    if not 0.0 <= t <= TWO_PI:
        raise DomainError("t must lie in [0, 2*pi]")
    if quad is None:
        quad = (_SINGULAR_CONV_QUAD if model.density_singular_at_endpoints
                else _SMOOTH_CONV_QUAD)
    peak = (n + 1.0) * (2.0 * n + 1.0) / 6.0
    conv_var = _convolve(lambda xs: np.atleast_1d(kernels.fejer(n, xs)),
                         model, t, quad)
    conv_dvar = peak * _convolve(
        lambda xs: np.atleast_1d(kernels.second_moment_kernel(n, xs)), model, t, quad)
    conv_cov = 0.5 * _convolve(
        lambda xs: np.atleast_1d(kernels.fejer_derivative(n, xs)), model, t, quad)
    return (abs(variance(model, n, t) - conv_var),
            abs(derivative_variance(model, n, t) - conv_dvar),
            abs(cross_covariance(model, n, t) - conv_cov))

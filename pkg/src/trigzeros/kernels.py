"""Trigonometric smoothing kernels used by the covariance identities.

Three kernels appear: the Fejer kernel, its derivative, and the unit-mass
"second-moment" kernel that governs the derivative variance.  All are
2pi-periodic trigonometric polynomials, so the closed forms below have
removable singularities at multiples of 2pi; near those points the
evaluators switch to series or direct Fourier sums to avoid cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .quadrature import QuadratureConfig, integrate

TWO_PI = 2.0 * math.pi

# |sin(x/2)| below this uses the quadratic Taylor branch of the Fejer kernel
_FEJER_SERIES_CUT = 1e-8

# |sin(x/2)| below this switches the Fejer derivative to its direct Fourier
# sum, which costs O(n) but has no cancellation
_SUM_BRANCH_CUT = 1e-4

# the second-moment closed form loses ~eps (n+1) / (n^2 x^2) relative
# accuracy near the lattice, so it hands over to the direct sum earlier
_SECOND_MOMENT_CUT = 0.02


class KernelKind(Enum):
    FEJER = "fejer"
    SECOND_MOMENT = "second_moment"


@dataclass(frozen=True)
class KernelFamily:
    """Kernels at a fixed degree, with the exact unit-mass normalizer."""

    degree: int

    def __post_init__(self):
        if self.degree < 1:
            raise DomainError("degree must be a positive integer")

    @property
    def normalizer(self) -> float:
        return 6.0 / ((self.degree + 1) * (2 * self.degree + 1))

    def normalizer_exact(self) -> Fraction:
        return Fraction(6, (self.degree + 1) * (2 * self.degree + 1))

    def fejer(self, x):
        return fejer(self.degree, x)

    def fejer_derivative(self, x):
        return fejer_derivative(self.degree, x)

    def second_moment(self, x):
        return second_moment_kernel(self.degree, x)


def _check_degree(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("n must be a positive integer")


def _prepare(x):
    arr = np.asarray(x)
    scalar = arr.ndim == 0
    return np.atleast_1d(arr).astype(float), scalar


def _finish(out: np.ndarray, scalar: bool, shape):
    return float(out[0]) if scalar else out.reshape(shape)


def fejer(n: int, x) -> float | np.ndarray:
    """Fejer kernel (1/n) (sin(nx/2) / sin(x/2))^2, periodic, value n at 0."""
    _check_degree(n)
    arr, scalar = _prepare(x)
    s = np.sin(0.5 * arr)
    out = np.empty_like(arr)
    near = np.abs(s) < _FEJER_SERIES_CUT
    if np.any(near):
        u = arr[near] - TWO_PI * np.round(arr[near] / TWO_PI)
        out[near] = n * (1.0 - (n * n - 1.0) * u * u / 12.0)
    rest = ~near
    if np.any(rest):
        ratio = np.sin(0.5 * n * arr[rest]) / s[rest]
        out[rest] = ratio * ratio / n
    return _finish(out, scalar, np.shape(x))


def _fejer_derivative_sum(n: int, xs: np.ndarray) -> np.ndarray:
    # K_n'(x) = -2 sum_{r<n} r (1 - r/n) sin(rx), exact and stable everywhere
    if n == 1:
        return np.zeros_like(xs)
    r = np.arange(1, n, dtype=float)
    w = r * (1.0 - r / n)
    return -2.0 * (w @ np.sin(r[:, None] * xs[None, :]))


def fejer_derivative(n: int, x) -> float | np.ndarray:
    """Derivative of the Fejer kernel on the open period (0, 2pi)."""
    _check_degree(n)
    arr, scalar = _prepare(x)
    if np.any(arr <= 0.0) or np.any(arr >= TWO_PI):
        raise DomainError("x must lie strictly inside (0, 2*pi)")
    s = np.sin(0.5 * arr)
    out = np.empty_like(arr)
    near = np.abs(s) < _SUM_BRANCH_CUT
    if np.any(near):
        out[near] = _fejer_derivative_sum(n, arr[near])
    rest = ~near
    if np.any(rest):
        xr = arr[rest]
        sr = s[rest]
        sn = np.sin(0.5 * n * xr)
        cn = np.cos(0.5 * n * xr)
        out[rest] = sn * cn / sr ** 2 - np.cos(0.5 * xr) * sn ** 2 / (n * sr ** 3)
    return _finish(out, scalar, np.shape(x))


def _second_moment_sum(n: int, xs: np.ndarray) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    phase = k[:, None] * xs[None, :]
    re = k @ np.cos(phase)
    im = k @ np.sin(phase)
    alpha = 6.0 / ((n + 1.0) * (2.0 * n + 1.0))
    return (alpha / n) * (re * re + im * im)


def second_moment_kernel(n: int, x) -> float | np.ndarray:
    """Unit-mass kernel (alpha_n / n) |sum_{k<=n} k e^{ikx}|^2.

    alpha_n = 6 / ((n+1)(2n+1)); the peak value at x = 0 is
    3 n (n+1) / (2 (2n+1)).
    """
    _check_degree(n)
    arr, scalar = _prepare(x)
    s = np.sin(0.5 * arr)
    out = np.empty_like(arr)
    near = np.abs(s) < _SECOND_MOMENT_CUT
    if np.any(near):
        out[near] = _second_moment_sum(n, arr[near])
    rest = ~near
    if np.any(rest):
        xr = arr[rest]
        z = np.exp(1j * xr)
        zn = np.exp(1j * n * xr)
        numerator = 1.0 - zn * z - (n + 1.0) * zn * (1.0 - z)
        denom = (2.0 * s[rest]) ** 4
        alpha = 6.0 / ((n + 1.0) * (2.0 * n + 1.0))
        out[rest] = (alpha / n) * np.abs(numerator) ** 2 / denom
    return _finish(out, scalar, np.shape(x))


def second_moment_tail_envelope(n: int, eps: float) -> float:
    """Analytic bound for the second-moment tail mass outside (-eps, eps).

    (1/2pi) * alpha_n * ((n+1)/sin(eps/2) + 2/sin(eps/2)^2), which is O(1/n).
    """
    _check_degree(n)
    if not 0.0 < eps < math.pi:
        raise DomainError("eps must lie in (0, pi)")
    alpha = 6.0 / ((n + 1.0) * (2.0 * n + 1.0))
    s = math.sin(0.5 * eps)
    return alpha * ((n + 1.0) / s + 2.0 / (s * s)) / TWO_PI


_TAIL_QUAD = QuadratureConfig(panels=64, points_per_panel=16, grading=1.0,
                              max_refinements=12, rel_tol=1e-11)


def kernel_tail_mass(kernel: KernelKind | str, n: int, eps: float,
                     quad: QuadratureConfig | None = None) -> float:
    """Normalized mass (1/2pi) int_eps^{2pi-eps} of the requested kernel."""
    _check_degree(n)
    if not 0.0 < eps < math.pi:
        raise DomainError("eps must lie in (0, pi)")
    kind = KernelKind(kernel)
    if quad is None:
        quad = _TAIL_QUAD
    if kind is KernelKind.FEJER:
        f = lambda xs: np.atleast_1d(fejer(n, xs))
    else:
        f = lambda xs: np.atleast_1d(second_moment_kernel(n, xs))
    value, _ = integrate(f, eps, TWO_PI - eps, quad)
    return value / TWO_PI

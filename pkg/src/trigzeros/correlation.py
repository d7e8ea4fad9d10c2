"""Stationary correlation models for the coefficient sequence and their
spectral densities.

A model fixes the correlation rho(k) between coefficients k lags apart
(rho(0) = 1) together with the spectral density
psi(x) = sum_k rho(|k|) e^{ikx} = 1 + 2 sum_{k>=1} rho(k) cos(kx).
Everything downstream only needs rho on nonnegative integer lags and psi
on the open period (0, 2pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .quadrature import QuadratureConfig, integrate

TWO_PI = 2.0 * math.pi

# terms kept on each side of the lattice sum for the fGn density; the
# remainder is folded in with an Euler-Maclaurin tail (see _lattice_tail)
_LATTICE_TERMS = 64

# lags below this use the direct fGn second-difference formula, larger lags
# switch to a binomial series in 1/k that avoids catastrophic cancellation
_FGN_SERIES_LAG = 8.0

# validation grid stays this far away from the (possibly singular) endpoints
_GRID_MARGIN = 1e-3


class ModelKind(Enum):
    IID = "iid"
    GEOMETRIC = "geometric"
    FRACTIONAL_GAUSSIAN_NOISE = "fgn"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class CorrelationModel:
    """One of the supported coefficient correlation structures.

    Use the classmethod constructors; they validate parameters up front so
    every instance in circulation is well formed.
    """

    kind: ModelKind
    ratio: float | None = None
    hurst: float | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def iid(cls) -> "CorrelationModel":
        return cls(ModelKind.IID)

    @classmethod
    def geometric(cls, ratio: float) -> "CorrelationModel":
        if not 0.0 < ratio < 1.0:
            raise DomainError("ratio must lie in the open interval (0, 1)")
        return cls(ModelKind.GEOMETRIC, ratio=float(ratio))

    @classmethod
    def fractional_gaussian_noise(cls, hurst: float) -> "CorrelationModel":
        if not 0.5 < hurst < 1.0:
            raise DomainError("hurst must lie in the open interval (1/2, 1)")
        return cls(ModelKind.FRACTIONAL_GAUSSIAN_NOISE, hurst=float(hurst))

    @classmethod
    def tabulated(cls, values: Sequence[float]) -> "CorrelationModel":
        vals = tuple(float(v) for v in values)
        if not vals or vals[0] != 1.0:
            raise DomainError("values must start with rho(0) = 1")
        if any(abs(v) > 1.0 for v in vals):
            raise DomainError("values must satisfy |rho(k)| <= 1")
        return cls(ModelKind.TABULATED, values=vals)

    @property
    def has_closed_form_density(self) -> bool:
        return self.kind in (ModelKind.IID, ModelKind.GEOMETRIC)

    @property
    def density_singular_at_endpoints(self) -> bool:
        return self.kind is ModelKind.FRACTIONAL_GAUSSIAN_NOISE

    @property
    def label(self) -> str:
        if self.kind is ModelKind.IID:
            return "iid"
        if self.kind is ModelKind.GEOMETRIC:
            return f"geometric(r={self.ratio:g})"
        if self.kind is ModelKind.FRACTIONAL_GAUSSIAN_NOISE:
            return f"fgn(H={self.hurst:g})"
        return f"tabulated(lags={len(self.values)})"

    def to_config(self) -> dict:
        """Serializable {kind, params} record."""
        if self.kind is ModelKind.IID:
            params: dict = {}
        elif self.kind is ModelKind.GEOMETRIC:
            params = {"r": self.ratio}
        elif self.kind is ModelKind.FRACTIONAL_GAUSSIAN_NOISE:
            params = {"H": self.hurst}
        else:
            params = {str(i): v for i, v in enumerate(self.values)}
        return {"kind": self.kind.value, "params": params}

    @classmethod
    def from_config(cls, config: Mapping) -> "CorrelationModel":
        try:
            kind = str(config["kind"]).lower()
        except (KeyError, TypeError) as exc:
            raise DomainError("model config must carry a 'kind' key") from exc
        params = config.get("params") or {}
        if not isinstance(params, Mapping):
            raise DomainError("model params must be a mapping")
        if kind == "iid":
            return cls.iid()
        if kind == "geometric":
            if "r" not in params:
                raise DomainError("geometric model needs params.r")
            return cls.geometric(float(params["r"]))
        if kind == "fgn":
            if "H" not in params:
                raise DomainError("fgn model needs params.H")
            return cls.fractional_gaussian_noise(float(params["H"]))
        if kind == "tabulated":
            try:
                items = sorted(((int(k), float(v)) for k, v in params.items()))
            except (TypeError, ValueError) as exc:
                raise DomainError("tabulated params must map lag -> value") from exc
            if [k for k, _ in items] != list(range(len(items))):
                raise DomainError("tabulated params must cover lags 0..K without gaps")
            return cls.tabulated([v for _, v in items])
        raise DomainError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the integrability / positive-infimum validation."""

    l1_norm: float
    infimum: float
    argmin: float
    grid_points: int
    passes: bool


def _fgn_rho(hurst: float, k: np.ndarray) -> np.ndarray:
    a = 2.0 * hurst
    out = np.empty_like(k)
    small = k < _FGN_SERIES_LAG
    ks = k[small]
    out[small] = 0.5 * (np.abs(1.0 + ks) ** a + np.abs(1.0 - ks) ** a
                        - 2.0 * np.abs(ks) ** a)
    kl = k[~small]
    if kl.size:
        # rho(k) = k^{2H}/2 * ((1+1/k)^{2H} + (1-1/k)^{2H} - 2); expand the
        # bracket as 2*sum_m binom(2H, 2m) k^{-2m} to keep full precision
        u2 = (1.0 / kl) ** 2
        acc = np.zeros_like(kl)
        upow = np.ones_like(kl)
        binom = 1.0
        for j in range(1, 18):
            binom *= (a - j + 1) / j
            if j % 2 == 0:
                upow = upow * u2
                acc = acc + binom * upow
        out[~small] = kl ** a * acc
    return out


def correlation(model: CorrelationModel, k) -> float | np.ndarray:
    """Correlation rho(k) at nonnegative integer lag(s) k."""
    arr = np.asarray(k)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(arr < 0) or np.any(arr != np.floor(arr)):
        raise DomainError("k must be a nonnegative integer lag")
    if model.kind is ModelKind.IID:
        out = np.where(arr == 0, 1.0, 0.0)
    elif model.kind is ModelKind.GEOMETRIC:
        out = model.ratio ** arr
    elif model.kind is ModelKind.FRACTIONAL_GAUSSIAN_NOISE:
        out = _fgn_rho(model.hurst, arr)
    else:
        vals = np.asarray(model.values)
        idx = arr.astype(int)
        inside = idx < len(vals)
        out = np.where(inside, vals[np.minimum(idx, len(vals) - 1)], 0.0)
    return float(out[0]) if scalar else out.reshape(np.shape(k))


def _fgn_scale(hurst: float) -> float:
    return math.sin(math.pi * hurst) * math.gamma(2.0 * hurst + 1.0)


def _lattice_tail(s: float, y: np.ndarray) -> np.ndarray:
    """sum_{q>=0} (y + 2 pi q)^(-s) by Euler-Maclaurin at the left edge."""
    return (y ** (1.0 - s) / (TWO_PI * (s - 1.0))
            + 0.5 * y ** (-s)
            + TWO_PI * s * y ** (-(s + 1.0)) / 12.0
            - TWO_PI ** 3 * s * (s + 1.0) * (s + 2.0) * y ** (-(s + 3.0)) / 720.0)


def _fgn_lattice_sum(hurst: float, x: np.ndarray) -> np.ndarray:
    """sum_{j in Z} |2 pi j + x|^{-(2H+1)} for x in (0, 2pi)."""
    s = 2.0 * hurst + 1.0
    j = np.arange(1, _LATTICE_TERMS + 1, dtype=float)[:, None]
    total = x ** (-s)
    total = total + ((TWO_PI * j + x) ** (-s)).sum(axis=0)
    total = total + ((TWO_PI * j - x) ** (-s)).sum(axis=0)
    edge = TWO_PI * (_LATTICE_TERMS + 1)
    total = total + _lattice_tail(s, edge + x) + _lattice_tail(s, edge - x)
    return total


def _fgn_lattice_remainder_at_zero(hurst: float) -> float:
    """The lattice sum with the central j = 0 term removed, at x = 0."""
    s = 2.0 * hurst + 1.0
    j = np.arange(1, _LATTICE_TERMS + 1, dtype=float)
    head = float(((TWO_PI * j) ** (-s)).sum())
    return 2.0 * (head + float(_lattice_tail(s, TWO_PI * (_LATTICE_TERMS + 1))))


def spectral_density(model: CorrelationModel, x) -> float | np.ndarray:
    """Spectral density psi(x) on the open period (0, 2pi)."""
    arr = np.asarray(x)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(arr <= 0.0) or np.any(arr >= TWO_PI):
        raise DomainError("x must lie strictly inside (0, 2*pi)")
    if model.kind is ModelKind.IID:
        out = np.ones_like(arr)
    elif model.kind is ModelKind.GEOMETRIC:
        r = model.ratio
        out = (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(arr) + r * r)
    elif model.kind is ModelKind.FRACTIONAL_GAUSSIAN_NOISE:
        scale = _fgn_scale(model.hurst)
        # 2 c_H (1 - cos x) written via sin^2(x/2) to stay accurate near 0
        out = 4.0 * scale * np.sin(0.5 * arr) ** 2 * _fgn_lattice_sum(model.hurst, arr)
    else:
        lags = np.arange(1, len(model.values), dtype=float)
        coef = np.asarray(model.values[1:])
        out = 1.0 + 2.0 * (np.cos(lags[:, None] * arr[None, :]) * coef[:, None]).sum(axis=0)
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def fgn_density_head_integral(model: CorrelationModel, eps: float) -> float:
    """Integral of the fGn density over (0, eps], eps small, via series.

    Splits psi = 2 c_H (1 - cos x) (x^{-(2H+1)} + remainder); the singular
    part integrates term by term against the cosine series, the smooth
    remainder contributes 2 c_H R(0) (eps - sin eps) to this order.
    """
    if model.kind is not ModelKind.FRACTIONAL_GAUSSIAN_NOISE:
        raise DomainError("head integral is specific to the fGn density")
    if not 0.0 < eps <= 0.01:
        raise DomainError("eps must lie in (0, 0.01] for the series to apply")
    hurst = model.hurst
    scale = _fgn_scale(hurst)
    singular = 0.0
    sign = 1.0
    factorial = 1.0
    for j in range(1, 5):
        factorial *= (2 * j) * (2 * j - 1)
        power = 2.0 * j - 2.0 * hurst
        singular += sign * eps ** power / (factorial * power)
        sign = -sign
    remainder = _fgn_lattice_remainder_at_zero(hurst) * (eps - math.sin(eps))
    return 2.0 * scale * (singular + remainder)


def _golden_section_min(f, lo: float, hi: float, tol: float = 1e-12) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a < tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    xmin = 0.5 * (a + b)
    return xmin, f(xmin)


_L1_QUAD = QuadratureConfig(panels=64, points_per_panel=16, grading=2.0,
                            max_refinements=12, rel_tol=1e-10)


def validate_hypotheses(model: CorrelationModel, grid_points: int = 4096,
                        quad: QuadratureConfig | None = None) -> HypothesisReport:
    """Check integrability of psi and positivity of its infimum.

    The infimum is located on a uniform grid over
    [1e-3, 2pi - 1e-3] and refined by golden-section search; the L1 norm
    uses endpoint-graded quadrature, with an analytic series for the
    singular head when the density diverges at the endpoints.
    """
    if grid_points < 16:
        raise DomainError("grid_points must be at least 16")
    if quad is None:
        quad = _L1_QUAD

    grid = np.linspace(_GRID_MARGIN, TWO_PI - _GRID_MARGIN, grid_points)
    values = np.atleast_1d(spectral_density(model, grid))
    i = int(np.argmin(values))
    lo = grid[max(0, i - 1)]
    hi = grid[min(grid_points - 1, i + 1)]
    argmin, refined = _golden_section_min(lambda t: float(spectral_density(model, t)), lo, hi)
    infimum = min(float(values[i]), refined)
    if refined > values[i]:
        argmin = float(grid[i])

    def absdensity(xs: np.ndarray) -> np.ndarray:
        return np.abs(np.atleast_1d(spectral_density(model, xs)))

    if model.density_singular_at_endpoints:
        body, _ = integrate(absdensity, _GRID_MARGIN, TWO_PI - _GRID_MARGIN, quad)
        # the density is symmetric about pi, so both heads match
        head = fgn_density_head_integral(model, _GRID_MARGIN)
        l1 = (body + 2.0 * head) / TWO_PI
    else:
        body, _ = integrate(absdensity, 0.0, TWO_PI, quad)
        l1 = body / TWO_PI

    passes = bool(infimum > 0.0 and math.isfinite(l1))
    return HypothesisReport(l1_norm=l1, infimum=infimum, argmin=argmin,
                            grid_points=grid_points, passes=passes)


@lru_cache(maxsize=64)
def cached_hypothesis_report(model: CorrelationModel) -> HypothesisReport:
    """validate_hypotheses with default settings, memoised per model."""
    return validate_hypotheses(model)

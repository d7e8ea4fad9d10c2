"""Monte Carlo side: draw coefficient vectors, evaluate the polynomial,
count its real zeros.

Coefficient vectors a and b are independent, each N(0, T) with
T[k, l] = rho(|k - l|).  Small degrees factor T by Cholesky; larger ones
use circulant embedding so a draw costs O(n log n).  Every trial derives
its own counter-based RNG streams from (seed, trial), so results do not
depend on execution order.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .correlation import CorrelationModel, ModelKind, correlation
from .errors import DomainError, EmbeddingError, FactorizationError

TWO_PI = 2.0 * math.pi

# largest degree factored by dense Cholesky; beyond this the circulant
# embedding path takes over
CHOLESKY_MAX = 512

# embedding eigenvalues in [-EIG_TOL, 0) count as rounding noise and are
# clipped; anything below raises EmbeddingError
_EIG_TOL = 1e-8

_MIN_GRID = 512


class TangencyWarning(UserWarning):
    """The sample grazes zero without a sign change (near-tangency)."""


@dataclass(frozen=True, eq=False)
class CoefficientDraw:
    """One sampled coefficient pair (a, b) with its RNG provenance."""

    a: np.ndarray
    b: np.ndarray
    seed: int
    model_id: str

    @property
    def degree(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class RootCountConfig:
    """Grid and refinement settings for sign-change zero counting."""

    oversampling: int = 16
    refine_tol: float = 1e-9
    tangency_margin: float = 1e-9

    def __post_init__(self):
        if self.oversampling < 4:
            raise DomainError("oversampling must be at least 4")
        if not 0.0 < self.refine_tol < 1.0:
            raise DomainError("refine_tol must lie in (0, 1)")
        if self.tangency_margin < 0.0:
            raise DomainError("tangency_margin must be nonnegative")


def _check_degree(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("n must be a positive integer")


def _generator(seed: int, spawn_key: tuple[int, ...]) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))


@lru_cache(maxsize=32)
def _cholesky_factor(model: CorrelationModel, n: int) -> np.ndarray:
    idx = np.arange(n)
    toeplitz = np.atleast_2d(correlation(model, np.abs(idx[:, None] - idx[None, :])))
    try:
        return np.linalg.cholesky(toeplitz)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(
            f"covariance of {model.label} is not positive definite at n={n}") from exc


@lru_cache(maxsize=32)
def _embedding_eigenvalues(model: CorrelationModel, n: int) -> np.ndarray:
    """Eigenvalues of the circulant extension built from rho(0..n)."""
    lags = np.arange(n + 1)
    rho = np.atleast_1d(correlation(model, lags))
    first_row = np.concatenate((rho, rho[-2:0:-1]))
    eig = np.fft.fft(first_row).real
    worst = float(eig.min())
    if worst < -_EIG_TOL:
        raise EmbeddingError(
            f"circulant embedding of {model.label} has eigenvalue {worst:.3e} "
            f"below -{_EIG_TOL:g} at n={n}")
    return np.maximum(eig, 0.0)


def _circulant_sample(eig: np.ndarray, rng: np.random.Generator, n: int) -> np.ndarray:
    # real part of F* sqrt(eig) (u + iv) is N(0, C); keep the leading block
    m = eig.size
    noise = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    sample = math.sqrt(m) * np.fft.ifft(np.sqrt(eig) * noise)
    return sample.real[:n].copy()


def _draw_with_key(model: CorrelationModel, n: int, seed: int,
                   base_key: tuple[int, ...]) -> CoefficientDraw:
    rng_a = _generator(seed, base_key + (0,))
    rng_b = _generator(seed, base_key + (1,))
    if model.kind is ModelKind.IID:
        a = rng_a.standard_normal(n)
        b = rng_b.standard_normal(n)
    elif n <= CHOLESKY_MAX:
        factor = _cholesky_factor(model, n)
        a = factor @ rng_a.standard_normal(n)
        b = factor @ rng_b.standard_normal(n)
    else:
        eig = _embedding_eigenvalues(model, n)
        a = _circulant_sample(eig, rng_a, n)
        b = _circulant_sample(eig, rng_b, n)
    return CoefficientDraw(a=a, b=b, seed=int(seed), model_id=model.label)


def draw_coefficients(model: CorrelationModel, n: int, seed: int) -> CoefficientDraw:
    """Draw one coefficient pair; a and b come from separate streams."""
    _check_degree(n)
    return _draw_with_key(model, n, seed, ())


def draw_for_trial(model: CorrelationModel, n: int, seed: int, trial: int) -> CoefficientDraw:
    """The draw Monte Carlo trial `trial` would see under this seed."""
    _check_degree(n)
    if trial < 0:
        raise DomainError("trial must be nonnegative")
    return _draw_with_key(model, n, seed, (int(trial),))


def _eval_direct(a: np.ndarray, b: np.ndarray, ts: np.ndarray) -> np.ndarray:
    k = np.arange(1, len(a) + 1, dtype=float)
    phase = k[:, None] * np.asarray(ts, dtype=float)[None, :]
    return a @ np.cos(phase) + b @ np.sin(phase)


def _is_full_period_grid(grid: np.ndarray, n: int) -> bool:
    m = grid.size
    if m < 2 * n + 2:
        return False
    reference = np.arange(m) * (TWO_PI / m)
    return bool(np.max(np.abs(grid - reference)) <= 1e-12)


def evaluate_polynomial(draw: CoefficientDraw, grid: np.ndarray) -> np.ndarray:
    """Sample sum a_k cos(kt) + b_k sin(kt) on a sorted grid in [0, 2pi).

    Equispaced full-period grids with at least 2n + 2 points go through a
    single inverse FFT; anything else falls back to direct summation.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a nonempty 1-d array")
    if np.any(np.diff(grid) < 0) or grid[0] < 0.0 or grid[-1] >= TWO_PI:
        raise DomainError("grid must be sorted within [0, 2*pi)")
    n = draw.degree
    if _is_full_period_grid(grid, n):
        m = grid.size
        spectrum = np.zeros(m, dtype=complex)
        spectrum[1:n + 1] = draw.a - 1j * draw.b
        return m * np.fft.ifft(spectrum).real
    return _eval_direct(draw.a, draw.b, grid)


def _bisect_brackets(draw: CoefficientDraw, lo: np.ndarray, hi: np.ndarray,
                     sign_lo: np.ndarray, tol: float) -> np.ndarray:
    """Shrink sign-change brackets below tol; vectorized over brackets."""
    lo = lo.copy()
    hi = hi.copy()
    sign_lo = sign_lo.copy()
    for _ in range(80):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = _eval_direct(draw.a, draw.b, mid)
        sm = np.sign(fm)
        hit = sm == 0.0
        go_right = sm == sign_lo
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
        lo = np.where(hit, mid, lo)
        hi = np.where(hit, mid, hi)
    return 0.5 * (lo + hi)


def count_zeros(draw: CoefficientDraw, interval: Sequence[float],
                config: RootCountConfig | None = None) -> int:
    """Number of zeros of the sample path on [lo, hi) subset of [0, 2pi).

    Sign changes on an oversampled grid are refined by bisection, then
    deduplicated; grid points that graze zero without a sign change raise
    a TangencyWarning but are never double counted.
    """
    if config is None:
        config = RootCountConfig()
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 <= lo < hi <= TWO_PI):
        raise DomainError("interval must satisfy 0 <= lo < hi <= 2*pi")
    n = draw.degree
    m = max(config.oversampling * n, _MIN_GRID)
    grid = np.arange(m) * (TWO_PI / m)
    values = evaluate_polynomial(draw, grid)

    left = values
    right = np.roll(values, -1)
    t_left = grid
    t_right = np.concatenate((grid[1:], [TWO_PI]))

    relevant = (t_right > lo) & (t_left < hi)
    sign_l = np.sign(left)
    sign_r = np.sign(right)
    change = relevant & (sign_l * sign_r < 0.0)

    grazing = relevant & (np.abs(left) < config.tangency_margin) & (sign_l != 0.0)
    grazing &= ~change & ~np.roll(change, 1)
    if np.any(grazing):
        warnings.warn(
            f"{int(np.count_nonzero(grazing))} grid point(s) graze zero "
            f"without a sign change; counted as plain crossings only",
            TangencyWarning, stacklevel=2)

    roots = []
    exact = relevant & (sign_l == 0.0)
    if np.any(exact):
        roots.append(t_left[exact])
    if np.any(change):
        refined = _bisect_brackets(draw, t_left[change], t_right[change],
                                   sign_l[change], config.refine_tol)
        roots.append(refined)
    if not roots:
        return 0
    roots = np.sort(np.concatenate(roots))
    roots = roots[(roots >= lo) & (roots < hi)]
    if roots.size == 0:
        return 0
    distinct = 1 + int(np.count_nonzero(np.diff(roots) > config.refine_tol))
    return distinct


def monte_carlo_zero_mean(model: CorrelationModel, n: int, trials: int,
                          interval: Sequence[float] = (0.0, TWO_PI),
                          seed: int = 0,
                          config: RootCountConfig | None = None,
                          workers: int = 1) -> tuple[float, float]:
    """Mean zero count over independent trials, with its standard error.

    Trial i always uses RNG streams derived from (seed, i), so the result
    is reproducible and independent of worker scheduling.
    """
    _check_degree(n)
    if trials < 2:
        raise DomainError("trials must be at least 2")
    if workers < 1:
        raise DomainError("workers must be at least 1")
    if config is None:
        config = RootCountConfig()
    counts = np.empty(trials, dtype=float)

    def run(trial: int) -> None:
        draw = _draw_with_key(model, n, seed, (trial,))
        counts[trial] = count_zeros(draw, interval, config)

    if workers == 1:
        for trial in range(trials):
            run(trial)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(trials)))
    mean = float(counts.mean())
    std_error = float(counts.std(ddof=1) / math.sqrt(trials))
    return mean, std_error

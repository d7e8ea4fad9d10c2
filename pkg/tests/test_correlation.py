"""Correlation models, spectral densities, and the integrability checks.

Derived reference numbers were frozen from independent computations: the
density values at pi come from three mutually agreeing evaluations (lattice
sum, zeta-style tail comparison, and a brute-force Fourier partial sum with
cancellation-safe terms), and the head integrals from direct graded
quadrature of the density plus the analytic power-law piece below 1e-10.
"""

import math

import numpy as np
import pytest

from trigzeros.correlation import (CorrelationModel, ModelKind,
                                   cached_hypothesis_report, correlation,
                                   fgn_density_head_integral, spectral_density,
                                   validate_hypotheses)
from trigzeros.errors import DomainError

IID = CorrelationModel.iid()
GEO = CorrelationModel.geometric(0.5)
FGN = CorrelationModel.fractional_gaussian_noise(0.75)

# value of the fractional density at x = pi, one per Hurst index
DENSITY_AT_PI = {0.6: 0.7878125123, 0.75: 0.4747234828793608, 0.9: 0.1794793043}

# integral of the fractional density over (0, eps], keyed by (H, eps)
HEAD_INTEGRAL = {
    (0.6, 0.002): 0.009079126152601227,
    (0.6, 0.01): 0.03290177252614363,
    (0.75, 0.002): 0.08407486270893867,
    (0.75, 0.01): 0.1879968157644402,
    (0.9, 0.002): 0.7474110696532845,
    (0.9, 0.01): 1.0312244746044208,
}


def fgn_direct(k, hurst):
    """Half-difference definition; fine at small lags, cancels at large."""
    if k == 0:
        return 1.0
    k = float(k)
    return 0.5 * ((k + 1.0) ** (2 * hurst) + (k - 1.0) ** (2 * hurst)
                  - 2.0 * k ** (2 * hurst))


class TestCorrelation:
    def test_iid_is_a_delta(self):
        assert correlation(IID, 0) == 1.0
        np.testing.assert_array_equal(correlation(IID, np.arange(1, 9)),
                                      np.zeros(8))

    def test_geometric_closed_form(self):
        ks = np.arange(0, 20)
        np.testing.assert_allclose(correlation(GEO, ks), 0.5 ** ks, rtol=1e-15)

    def test_fgn_lag_one_is_sqrt2_minus_1(self):
        assert correlation(FGN, 1) == pytest.approx(math.sqrt(2.0) - 1.0,
                                                    abs=1e-15)

    @pytest.mark.parametrize("k", [2, 5, 7, 10, 25, 100])
    @pytest.mark.parametrize("hurst", [0.6, 0.75, 0.9])
    def test_fgn_matches_direct_formula(self, k, hurst):
        model = CorrelationModel.fractional_gaussian_noise(hurst)
        assert correlation(model, k) == pytest.approx(fgn_direct(k, hurst),
                                                      rel=1e-11)

    def test_fgn_power_law_asymptote(self):
        # rho(k) ~ H(2H-1) k^{2H-2} for large lags
        hurst = 0.75
        model = CorrelationModel.fractional_gaussian_noise(hurst)
        k = 10 ** 6
        expect = hurst * (2 * hurst - 1.0) * float(k) ** (2 * hurst - 2.0)
        assert correlation(model, k) == pytest.approx(expect, rel=1e-5)

    def test_tabulated_lookup_and_zero_fill(self):
        model = CorrelationModel.tabulated([1.0, 0.3, -0.1])
        np.testing.assert_allclose(correlation(model, np.arange(5)),
                                   [1.0, 0.3, -0.1, 0.0, 0.0])

    @pytest.mark.parametrize("bad", [-1, 0.5, np.array([1, -2])])
    def test_lags_must_be_nonnegative_integers(self, bad):
        with pytest.raises(DomainError):
            correlation(GEO, bad)


class TestModelValidation:
    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2, 1.5])
    def test_geometric_ratio_range(self, ratio):
        with pytest.raises(DomainError):
            CorrelationModel.geometric(ratio)

    @pytest.mark.parametrize("hurst", [0.5, 1.0, 0.3, 1.2])
    def test_hurst_must_be_in_open_upper_half(self, hurst):
        with pytest.raises(DomainError):
            CorrelationModel.fractional_gaussian_noise(hurst)

    @pytest.mark.parametrize("values", [[], [0.9, 0.1], [1.0, 1.2]])
    def test_tabulated_values(self, values):
        with pytest.raises(DomainError):
            CorrelationModel.tabulated(values)

    @pytest.mark.parametrize("model", [
        IID, GEO, FGN, CorrelationModel.tabulated([1.0, 0.25, -0.5]),
    ])
    def test_config_round_trip(self, model):
        again = CorrelationModel.from_config(model.to_config())
        assert again == model
        assert again.label == model.label

    def test_config_shape(self):
        config = GEO.to_config()
        assert config["kind"] == "geometric"
        assert config["params"] == {"r": 0.5}
        assert ModelKind(config["kind"]) is ModelKind.GEOMETRIC


class TestSpectralDensity:
    def test_iid_density_is_flat(self):
        xs = np.linspace(0.01, 2.0 * math.pi - 0.01, 101)
        np.testing.assert_array_equal(spectral_density(IID, xs), np.ones(101))

    def test_geometric_matches_truncated_fourier_series(self):
        # the series 1 + 2 sum r^k cos(kx) converges geometrically, so a
        # 200-term partial sum is an independent oracle at machine level
        xs = np.linspace(0.1, 2.0 * math.pi - 0.1, 37)
        ks = np.arange(1, 201)
        brute = 1.0 + 2.0 * (0.5 ** ks @ np.cos(np.outer(ks, xs)))
        np.testing.assert_allclose(spectral_density(GEO, xs), brute, rtol=1e-13)

    def test_geometric_minimum_at_pi(self):
        assert spectral_density(GEO, math.pi) == pytest.approx(1.0 / 3.0,
                                                               rel=1e-14)

    @pytest.mark.parametrize("hurst", [0.6, 0.75, 0.9])
    def test_fgn_value_at_pi(self, hurst):
        model = CorrelationModel.fractional_gaussian_noise(hurst)
        assert spectral_density(model, math.pi) == pytest.approx(
            DENSITY_AT_PI[hurst], abs=5e-9)

    @pytest.mark.parametrize("hurst", [0.6, 0.75, 0.9])
    def test_fgn_symmetry_and_positivity(self, hurst):
        model = CorrelationModel.fractional_gaussian_noise(hurst)
        xs = np.linspace(1e-3, math.pi, 64)
        left = spectral_density(model, xs)
        right = spectral_density(model, 2.0 * math.pi - xs)
        np.testing.assert_allclose(left, right, rtol=1e-12)
        assert np.all(left > 0.0)

    @pytest.mark.parametrize("hurst", [0.6, 0.75, 0.9])
    def test_fgn_small_x_power_law(self, hurst):
        model = CorrelationModel.fractional_gaussian_noise(hurst)
        scale = math.sin(math.pi * hurst) * math.gamma(2.0 * hurst + 1.0)
        x = 1e-8
        assert spectral_density(model, x) * x ** (2.0 * hurst - 1.0) == \
            pytest.approx(scale, rel=1e-6)

    @pytest.mark.parametrize("x", [0.0, 2.0 * math.pi, -0.5, 7.0])
    def test_open_interval_enforced(self, x):
        with pytest.raises(DomainError):
            spectral_density(FGN, x)


class TestHeadIntegral:
    @pytest.mark.parametrize("hurst,eps", sorted(HEAD_INTEGRAL))
    def test_frozen_values(self, hurst, eps):
        model = CorrelationModel.fractional_gaussian_noise(hurst)
        assert fgn_density_head_integral(model, eps) == pytest.approx(
            HEAD_INTEGRAL[(hurst, eps)], rel=1e-10)

    def test_only_defined_for_fractional_models(self):
        with pytest.raises(DomainError):
            fgn_density_head_integral(GEO, 0.01)

    def test_eps_cap(self):
        with pytest.raises(DomainError):
            fgn_density_head_integral(FGN, 0.5)


class TestHypotheses:
    def test_iid_report(self):
        report = validate_hypotheses(IID)
        assert report.passes
        assert report.l1_norm == pytest.approx(1.0, abs=1e-10)
        assert report.infimum == pytest.approx(1.0, abs=1e-12)

    def test_geometric_infimum_closed_form(self):
        report = validate_hypotheses(GEO)
        assert report.passes
        assert report.infimum == pytest.approx((1.0 - 0.5) / (1.0 + 0.5),
                                               rel=1e-10)
        assert report.argmin == pytest.approx(math.pi, abs=1e-5)
        assert report.l1_norm == pytest.approx(1.0, abs=1e-9)

    def test_fractional_report(self):
        report = validate_hypotheses(FGN)
        assert report.passes
        assert report.infimum == pytest.approx(DENSITY_AT_PI[0.75], abs=1e-8)
        assert report.argmin == pytest.approx(math.pi, abs=1e-5)
        # the density integrates to 2 pi rho(0), so the normalized norm is 1
        assert report.l1_norm == pytest.approx(1.0, abs=1e-9)

    def test_indefinite_tabulated_model_fails(self):
        model = CorrelationModel.tabulated([1.0, -0.6])
        report = validate_hypotheses(model)
        assert not report.passes
        assert report.infimum < 0.0

    def test_report_is_cached(self):
        first = cached_hypothesis_report(GEO)
        assert cached_hypothesis_report(GEO) is first

"""Tests for the energy-detector Monte Carlo and its exact error law."""

import math
from dataclasses import replace

import pytest

from src.constants import AMBIENT_CONSTANT, AMBIENT_GAUSSIAN
from src.detector import (
    DetectorConfig,
    detector_ber_exact,
    detector_ber_formula,
    detector_ber_mc,
    detector_moments,
)
from src.exceptions import DetectorError

QUADRATURE = math.pi / 2


def design_point_config(preset_params, n_s: int, bits: int = 10_000, **overrides) -> DetectorConfig:
    """Constant-envelope source, tag reflection in quadrature, S_0 = sigma^2 / 2.25."""
    params = replace(preset_params, p_t=1.0, h=1.0, n_s=n_s, **overrides)
    return DetectorConfig(
        gain_value=params.noise_power / 2.25,
        params=params,
        bits=bits,
        seed=13,
        ambient=AMBIENT_CONSTANT,
        tag_phase=QUADRATURE,
    )


def within_tolerance(result, reference: float) -> bool:
    return abs(result.ber - reference) <= max(3 * result.stderr, 0.1 * reference)


class TestClosedFormAgreement:
    @pytest.mark.parametrize("n_s, bits, expected", [
        (40, 100_000, 0.402),
        (1000, 100_000, 0.107),
        pytest.param(3500, 100_000, 0.0102, marks=pytest.mark.slow),
    ])
    def test_design_points(self, preset_params, n_s, bits, expected):
        config = design_point_config(preset_params, n_s, bits)
        formula = detector_ber_formula(config)
        assert formula == pytest.approx(expected, rel=0.02)
        assert within_tolerance(detector_ber_mc(config), formula)
        assert detector_ber_exact(config) == pytest.approx(formula, rel=0.1)

    def test_vanishing_reflection_is_coin_flip(self, preset_params):
        config = design_point_config(preset_params, 100, mu=1e-6)
        result = detector_ber_mc(config)
        assert abs(result.ber - 0.5) <= 4 * result.stderr
        assert detector_ber_exact(config) == pytest.approx(0.5, abs=1e-3)
        assert detector_ber_formula(config) == pytest.approx(0.5, abs=1e-3)

    def test_strong_link_never_errs(self, preset_params):
        params = replace(preset_params, p_t=1.0, h=1.0, mu=1.0)
        config = DetectorConfig(
            gain_value=1e-6, params=params, bits=2000, seed=3,
            ambient=AMBIENT_CONSTANT, tag_phase=QUADRATURE,
        )
        assert detector_ber_mc(config).ber == 0.0
        assert detector_ber_formula(config) < 1e-12


class TestExactLaw:
    def test_gaussian_ambient(self, preset_params):
        params = replace(preset_params, h=0.0625)
        config = DetectorConfig(gain_value=3e-5, params=params, bits=10_000, seed=21)
        exact = detector_ber_exact(config)
        result = detector_ber_mc(config)
        assert 0.05 < exact < 0.2
        assert abs(result.ber - exact) <= 4 * result.stderr

    def test_constant_ambient(self, preset_params):
        config = design_point_config(preset_params, 1000)
        result = detector_ber_mc(config)
        assert abs(result.ber - detector_ber_exact(config)) <= 4 * result.stderr

    def test_reversed_means(self, preset_params):
        # opposite phase shrinks the D = 1 envelope below the D = 0 one
        config = replace(design_point_config(preset_params, 400), tag_phase=math.pi)
        moments = detector_moments(config)
        assert moments.mean_1 < moments.mean_0
        result = detector_ber_mc(config)
        exact = detector_ber_exact(config)
        assert exact < 0.5
        assert abs(result.ber - exact) <= 4 * result.stderr


class TestStatistics:
    def test_more_samples_do_not_hurt(self, preset_params):
        short = detector_ber_mc(design_point_config(preset_params, 100))
        long = detector_ber_mc(design_point_config(preset_params, 400))
        assert long.ber <= short.ber + 3 * math.hypot(short.stderr, long.stderr)

    def test_empirical_moments(self, preset_params):
        config = design_point_config(preset_params, 1000)
        moments = detector_moments(config)
        result = detector_ber_mc(config)
        assert result.z_mean_0 == pytest.approx(moments.mean_0, rel=0.01, abs=0)
        assert result.z_mean_1 == pytest.approx(moments.mean_1, rel=0.01, abs=0)
        assert result.z_var_0 == pytest.approx(moments.var_0, rel=0.15, abs=0)
        assert result.z_var_1 == pytest.approx(moments.var_1, rel=0.15, abs=0)

    def test_moment_formulas(self, preset_params):
        config = DetectorConfig(gain_value=3e-5, params=preset_params, bits=1000)
        sigma2 = preset_params.noise_power
        s0, s1 = config.signal_powers()
        moments = detector_moments(config)
        assert moments.mean_0 == pytest.approx(s0 + sigma2, abs=0)
        assert moments.var_1 == pytest.approx((s1 + sigma2) ** 2 / preset_params.n_s, abs=0)
        assert moments.threshold == pytest.approx(0.5 * (moments.mean_0 + moments.mean_1), abs=0)
        constant = replace(config, ambient=AMBIENT_CONSTANT)
        assert detector_moments(constant).var_0 == pytest.approx(
            (sigma2 ** 2 + 2 * s0 * sigma2) / preset_params.n_s, abs=0
        )

    def test_deterministic(self, preset_params):
        config = design_point_config(preset_params, 40, bits=2000)
        assert detector_ber_mc(config) == detector_ber_mc(config)

    def test_chunking_covers_every_bit(self, preset_params):
        config = replace(design_point_config(preset_params, 40, bits=1500), chunk_samples=1000)
        result = detector_ber_mc(config)
        assert result.bits == 1500
        assert 0 <= result.errors <= 1500
        assert result.ber == result.errors / 1500


class TestValidation:
    def test_too_few_bits(self, preset_params):
        with pytest.raises(DetectorError):
            DetectorConfig(gain_value=3e-5, params=preset_params, bits=999)

    def test_unknown_ambient(self, preset_params):
        with pytest.raises(DetectorError):
            DetectorConfig(gain_value=3e-5, params=preset_params, ambient="laplace")

    def test_negative_gain(self, preset_params):
        with pytest.raises(DetectorError):
            DetectorConfig(gain_value=-1.0, params=preset_params)

    def test_empty_chunk(self, preset_params):
        with pytest.raises(DetectorError):
            DetectorConfig(gain_value=3e-5, params=preset_params, chunk_samples=0)

    def test_default_ambient(self, preset_params):
        assert DetectorConfig(gain_value=3e-5, params=preset_params).ambient == AMBIENT_GAUSSIAN

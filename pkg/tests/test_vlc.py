"""Tests for the indoor optical hop model."""

import math

import numpy as np
import pytest

from relay_aloha.numerics import ks_statistic
from relay_aloha.vlc import (
    UserPlacement,
    VlcChannelParams,
    build_snr_model,
    derive_vlc,
    erasure_prob_vlc,
    intensity_at,
    sample_user_radius,
    sample_user_snr,
    snr_of_intensity,
    vlc_snr_cdf,
)

# standard indoor optics: 90 deg FOV, 1 cm^2 detector, 0.4 A/W, unit filter,
# 1.5 lens index; 45 deg half-illuminance angle at 2.5 m height
TABLE_PARAMS = VlcChannelParams(
    fov_psi_max=math.radians(90.0),
    area=1e-4,
    responsivity=0.4,
    filter_gain=1.0,
    refractive_index=1.5,
    half_angle=math.radians(45.0),
    height=2.5,
)


@pytest.fixture(scope="module")
def derived():
    return derive_vlc(TABLE_PARAMS)


@pytest.fixture(scope="module")
def model(derived):
    # 1 W transmit, 0.8 O/E efficiency, 1e-21 W/Hz noise PSD, 20 MHz
    return build_snr_model(derived, 1.0, 0.8, 1e-21, 20e6)


class TestDerive:
    def test_half_angle_45_gives_order_two(self, derived):
        assert derived.lambert_order == pytest.approx(2.0, rel=1e-14)

    def test_half_angle_60_gives_order_one(self):
        params = VlcChannelParams(
            fov_psi_max=math.radians(90.0), area=1e-4, responsivity=0.4,
            filter_gain=1.0, refractive_index=1.5,
            half_angle=math.radians(60.0), height=2.5,
        )
        assert derive_vlc(params).lambert_order == pytest.approx(1.0, rel=1e-14)

    def test_concentrator_gain(self, derived):
        assert derived.concentrator_gain == pytest.approx(2.25, rel=1e-14)

    def test_cell_radius(self, derived):
        assert derived.cell_radius == pytest.approx(2.5, rel=1e-14)

    def test_intensity_const_two_route_fixture(self, derived):
        # frozen: direct composite-constant evaluation, cross-checked against
        # an independent evaluation of the raw LoS formula at r=0
        assert derived.intensity_const == pytest.approx(6.714349161689341e-4, rel=1e-12)

    def test_boresight_equals_raw_formula(self, derived):
        # independent route: raw Lambertian LoS formula at r=0 must equal i_max
        p = TABLE_PARAMS
        m = derived.lambert_order
        raw = (
            p.area * (m + 1.0) * p.responsivity * p.filter_gain
            * derived.concentrator_gain / (2.0 * math.pi * p.height**2)
        )
        assert derived.i_max == pytest.approx(raw, rel=1e-12)

    def test_intensity_bound_ratio_identity(self, derived):
        m = derived.lambert_order
        lhs = derived.i_max / derived.i_min
        rhs = ((derived.cell_radius**2 + derived.height**2) / derived.height**2) ** ((m + 3.0) / 2.0)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert 0.0 < derived.i_min < derived.i_max

    def test_param_validation(self):
        with pytest.raises(ValueError):
            VlcChannelParams(
                fov_psi_max=0.0, area=1e-4, responsivity=0.4, filter_gain=1.0,
                refractive_index=1.5, half_angle=math.radians(45.0), height=2.5,
            )
        with pytest.raises(ValueError):
            VlcChannelParams(
                fov_psi_max=math.radians(90.0), area=1e-4, responsivity=0.4,
                filter_gain=1.0, refractive_index=1.5,
                half_angle=math.radians(95.0), height=2.5,
            )
        with pytest.raises(ValueError):
            UserPlacement(radial_distance=-0.1)


class TestIntensity:
    def test_boresight_is_max(self, derived):
        assert intensity_at(TABLE_PARAMS, derived, 0.0) == pytest.approx(derived.i_max, rel=1e-14)

    def test_cell_edge_is_min(self, derived):
        value = intensity_at(TABLE_PARAMS, derived, derived.cell_radius)
        assert value == pytest.approx(derived.i_min, rel=1e-14)

    def test_fov_cutoff(self):
        # a 30 deg FOV cuts the signal inside the 45 deg footprint
        params = VlcChannelParams(
            fov_psi_max=math.radians(30.0), area=1e-4, responsivity=0.4,
            filter_gain=1.0, refractive_index=1.5,
            half_angle=math.radians(45.0), height=2.5,
        )
        d = derive_vlc(params)
        inside = d.height * math.tan(math.radians(29.0))
        outside = d.height * math.tan(math.radians(31.0))
        assert intensity_at(params, d, inside) > 0.0
        assert intensity_at(params, d, outside) == 0.0

    def test_strictly_decreasing_in_r(self, derived):
        r = np.linspace(0.0, derived.cell_radius, 200)
        values = intensity_at(TABLE_PARAMS, derived, r)
        assert np.all(np.diff(values) < 0.0)

    def test_rejects_negative_offset(self, derived):
        with pytest.raises(ValueError):
            intensity_at(TABLE_PARAMS, derived, -1.0)


class TestSnr:
    def test_zero_intensity_zero_snr(self, model):
        assert snr_of_intensity(model, 0.0) == 0.0

    def test_max_intensity_gives_gamma_max(self, model, derived):
        assert snr_of_intensity(model, derived.i_max) == pytest.approx(model.gamma_max, rel=1e-12)

    def test_square_law(self, model):
        base = snr_of_intensity(model, 1e-4)
        assert snr_of_intensity(model, 2e-4) == pytest.approx(4.0 * base, rel=1e-14)

    def test_scale_identity(self, model):
        assert model.mu_vlc == pytest.approx(
            model.tx_power**2 * model.oe_efficiency**2 / (model.noise_psd * model.bandwidth),
            rel=1e-15,
        )

    def test_bounds_formula(self, model, derived):
        m = derived.lambert_order
        scale = model.mu_vlc * derived.intensity_const**2
        assert model.gamma_min == pytest.approx(
            scale / (derived.cell_radius**2 + derived.height**2) ** (m + 3.0), rel=1e-12
        )
        assert model.gamma_max == pytest.approx(scale / derived.height ** (2 * (m + 3.0)), rel=1e-12)
        assert model.gamma_min < model.gamma_max

    def test_taller_room_weakens_peak_snr(self, model, derived):
        taller = VlcChannelParams(
            fov_psi_max=TABLE_PARAMS.fov_psi_max, area=TABLE_PARAMS.area,
            responsivity=TABLE_PARAMS.responsivity, filter_gain=TABLE_PARAMS.filter_gain,
            refractive_index=TABLE_PARAMS.refractive_index,
            half_angle=TABLE_PARAMS.half_angle, height=3.5,
        )
        d2 = derive_vlc(taller)
        m2 = build_snr_model(d2, 1.0, 0.8, 1e-21, 20e6)
        assert m2.gamma_max < model.gamma_max


class TestCdf:
    def test_zero_below_support(self, model, derived):
        assert vlc_snr_cdf(model, derived, 0.0) == 0.0
        assert vlc_snr_cdf(model, derived, model.gamma_min * 0.999) == 0.0

    def test_continuity_at_gamma_min(self, model, derived):
        assert vlc_snr_cdf(model, derived, model.gamma_min) == pytest.approx(0.0, abs=1e-12)

    def test_one_at_gamma_max_and_above(self, model, derived):
        assert vlc_snr_cdf(model, derived, model.gamma_max) == pytest.approx(1.0, abs=1e-12)
        assert vlc_snr_cdf(model, derived, model.gamma_max * 1.001) == 1.0

    def test_midpoint_formula(self, model, derived):
        gamma = math.sqrt(model.gamma_min * model.gamma_max)
        m = derived.lambert_order
        expected = (
            1.0
            + derived.height**2 / derived.cell_radius**2
            - (model.mu_vlc * derived.intensity_const**2 / gamma) ** (1.0 / (m + 3.0))
            / derived.cell_radius**2
        )
        assert vlc_snr_cdf(model, derived, gamma) == pytest.approx(expected, rel=1e-12)

    def test_monotone_and_bounded(self, model, derived):
        g = np.linspace(0.0, model.gamma_max * 1.2, 2000)
        values = vlc_snr_cdf(model, derived, g)
        assert np.all(np.diff(values) >= 0.0)
        assert np.all((values >= 0.0) & (values <= 1.0))

    def test_matches_geometric_sampling_oracle(self, model, derived):
        # pushforward identity: uniform-disk placement through the geometry
        rng = np.random.default_rng(2024)
        samples = np.sort(sample_user_snr(model, derived, rng, size=100_000))
        d = ks_statistic(samples, lambda g: vlc_snr_cdf(model, derived, g))
        assert d < 0.01

    def test_rejects_negative(self, model, derived):
        with pytest.raises(ValueError):
            vlc_snr_cdf(model, derived, -1.0)


class TestErasure:
    def test_threshold_below_support_never_erases(self, model, derived):
        assert erasure_prob_vlc(model, derived, model.gamma_min * 0.5) == 0.0

    def test_threshold_above_support_always_erases(self, model, derived):
        assert erasure_prob_vlc(model, derived, model.gamma_max * 2.0) == 1.0

    def test_midrange_matches_sampling_oracle(self, model, derived):
        gamma_th = 200.0
        rng = np.random.default_rng(555)
        n = 100_000
        snr = sample_user_snr(model, derived, rng, size=n)
        empirical = float(np.mean(snr < gamma_th))
        p = erasure_prob_vlc(model, derived, gamma_th)
        sigma = math.sqrt(p * (1.0 - p) / n)
        assert abs(empirical - p) < 3.0 * sigma


class TestSampling:
    def test_support(self, model, derived):
        rng = np.random.default_rng(1)
        snr = sample_user_snr(model, derived, rng, size=50_000)
        assert np.all(snr >= model.gamma_min * (1.0 - 1e-12))
        assert np.all(snr <= model.gamma_max * (1.0 + 1e-12))

    def test_radius_mean(self, derived):
        # density 2r/R^2 has mean 2R/3 and variance R^2/18
        rng = np.random.default_rng(2)
        n = 100_000
        r = sample_user_radius(derived, rng, size=n)
        mean = float(np.mean(r))
        expected = 2.0 * derived.cell_radius / 3.0
        sigma = math.sqrt(derived.cell_radius**2 / 18.0 / n)
        assert abs(mean - expected) < 3.0 * sigma

    def test_scalar_draw(self, model, derived):
        rng = np.random.default_rng(3)
        value = sample_user_snr(model, derived, rng)
        assert isinstance(value, float)
        assert model.gamma_min <= value <= model.gamma_max

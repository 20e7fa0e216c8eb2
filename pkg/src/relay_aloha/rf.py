"""Outdoor RF hop model.

Each relay-to-base-station link fades independently with Nakagami-m
statistics, so the instantaneous SNR is Gamma-distributed with shape m1
and mean mu_rf. The module exposes the CDF, the threshold erasure
probability, and a sampler, plus the incomplete-gamma kernel they share.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import regularized_gamma_q


@dataclass(frozen=True)
class RfChannelParams:
    """Nakagami fading parameter and average SNR (linear scale) of the RF hop."""

    m1: float
    mu_rf: float

    def __post_init__(self):
        if self.m1 < 0.5:
            raise ValueError(f"Nakagami fading parameter must be >= 0.5, got {self.m1}")
        if self.mu_rf <= 0.0:
            raise ValueError(f"average SNR must be positive, got {self.mu_rf}")


def gamma_upper_regularized(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x).

    Series expansion for x < a + 1, continued fraction otherwise; absolute
    error <= 1e-10. Raises ValueError outside a > 0, x >= 0.
    """
    return regularized_gamma_q(a, x)


def rf_snr_cdf(params: RfChannelParams, gamma: float) -> float:
    """CDF of the instantaneous RF SNR: 1 - Q(m1, m1 * gamma / mu_rf)."""
    if gamma < 0.0:
        raise ValueError(f"SNR must be non-negative, got {gamma}")
    return 1.0 - gamma_upper_regularized(params.m1, params.m1 * gamma / params.mu_rf)


def erasure_prob_rf(params: RfChannelParams, gamma_th: float) -> float:
    """Probability that a forwarded packet arrives at the sink below the decode threshold."""
    return rf_snr_cdf(params, gamma_th)


def sample_rf_snr(params: RfChannelParams, rng: np.random.Generator, size=None):
    """Instantaneous SNR draws: Gamma(shape m1, scale mu_rf / m1).

    Non-integer shapes are fine; the generator's rejection sampler handles
    them. Distribution matches rf_snr_cdf.
    """
    value = rng.gamma(params.m1, params.mu_rf / params.m1, size)
    return float(value) if size is None else value

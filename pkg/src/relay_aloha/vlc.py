"""Indoor optical (VLC) hop model.

Line-of-sight Lambertian link between a floor-level user and a
ceiling-mounted receiver: received intensity as a function of horizontal
offset, the electrical-domain SNR it induces, and the SNR distribution of
a user placed uniformly at random inside the lighting footprint. The
erasure probability of the optical hop is the CDF of that distribution
evaluated at the decoding threshold.

All types are immutable after construction and all operations are pure
given an externally supplied RNG, so they are safe to use concurrently as
long as each thread owns its generator. Reflected/diffuse propagation and
receiver tilt are out of scope; only the direct LoS component is modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class VlcChannelParams:
    """Geometry and optics constants of the indoor hop.

    Angles are radians, lengths meters, area m^2. ``height`` is the
    vertical distance between the user plane and the ceiling plane.
    """

    fov_psi_max: float
    area: float
    responsivity: float
    filter_gain: float
    refractive_index: float
    half_angle: float
    height: float

    def __post_init__(self):
        if not 0.0 < self.fov_psi_max <= _HALF_PI:
            raise ValueError(f"field of view must be in (0, pi/2], got {self.fov_psi_max}")
        if self.area <= 0.0:
            raise ValueError(f"photodetector area must be positive, got {self.area}")
        if self.responsivity <= 0.0:
            raise ValueError(f"responsivity must be positive, got {self.responsivity}")
        if self.filter_gain <= 0.0:
            raise ValueError(f"filter gain must be positive, got {self.filter_gain}")
        if self.refractive_index < 1.0:
            raise ValueError(f"refractive index must be >= 1, got {self.refractive_index}")
        if not 0.0 < self.half_angle < _HALF_PI:
            raise ValueError(f"half-illuminance semi-angle must be in (0, pi/2), got {self.half_angle}")
        if self.height <= 0.0:
            raise ValueError(f"height must be positive, got {self.height}")


@dataclass(frozen=True)
class VlcDerived:
    """Derived geometry of one optical cell.

    ``height`` and ``fov_radius`` ride along with the footprint radius so
    distribution-level operations need no second geometry argument.
    """

    lambert_order: float
    cell_radius: float
    concentrator_gain: float
    intensity_const: float
    i_min: float
    i_max: float
    height: float
    fov_radius: float


@dataclass(frozen=True)
class VlcSnrModel:
    """Electrical-domain SNR scale and support of the VLC link."""

    tx_power: float
    oe_efficiency: float
    noise_psd: float
    bandwidth: float
    mu_vlc: float
    gamma_min: float
    gamma_max: float


@dataclass(frozen=True)
class UserPlacement:
    """Radial offset of a user's floor position from the receiver's floor projection."""

    radial_distance: float

    def __post_init__(self):
        if self.radial_distance < 0.0:
            raise ValueError(f"radial distance must be non-negative, got {self.radial_distance}")


def derive_vlc(params: VlcChannelParams) -> VlcDerived:
    """Compute the derived cell geometry from the raw optics constants.

    The beam order follows from the half-illuminance semi-angle, the
    footprint radius from that semi-angle and the mounting height, and the
    composite intensity constant collects every factor of the LoS link
    that does not depend on the user's offset.
    """
    cos_half = math.cos(params.half_angle)
    if cos_half <= 0.0:
        raise ValueError("half-illuminance semi-angle must have positive cosine")
    sin_fov = math.sin(params.fov_psi_max)
    if sin_fov == 0.0:
        raise ValueError("field of view must have non-zero sine")
    m = -math.log(2.0) / math.log(cos_half)
    length = params.height
    r_cell = length * math.tan(params.half_angle)
    gain = params.refractive_index**2 / sin_fov**2
    const = (
        params.area * (m + 1.0) * params.responsivity * params.filter_gain * gain
        * length ** (m + 1.0) / (2.0 * math.pi)
    )
    i_max = const / length ** (m + 3.0)
    i_min = const / (r_cell**2 + length**2) ** ((m + 3.0) / 2.0)
    if params.fov_psi_max >= _HALF_PI:
        fov_radius = math.inf
    else:
        fov_radius = length * math.tan(params.fov_psi_max)
    return VlcDerived(
        lambert_order=m,
        cell_radius=r_cell,
        concentrator_gain=gain,
        intensity_const=const,
        i_min=i_min,
        i_max=i_max,
        height=length,
        fov_radius=fov_radius,
    )


def build_snr_model(
    derived: VlcDerived,
    tx_power: float,
    oe_efficiency: float,
    noise_psd: float,
    bandwidth: float,
) -> VlcSnrModel:
    """Attach transmit power and noise figures to a derived cell geometry."""
    if tx_power <= 0.0:
        raise ValueError(f"transmit power must be positive, got {tx_power}")
    if oe_efficiency <= 0.0:
        raise ValueError(f"O/E conversion efficiency must be positive, got {oe_efficiency}")
    if noise_psd <= 0.0:
        raise ValueError(f"noise PSD must be positive, got {noise_psd}")
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    mu = tx_power**2 * oe_efficiency**2 / (noise_psd * bandwidth)
    m = derived.lambert_order
    length = derived.height
    gamma_min = mu * derived.intensity_const**2 / (derived.cell_radius**2 + length**2) ** (m + 3.0)
    gamma_max = mu * derived.intensity_const**2 / length ** (2.0 * (m + 3.0))
    return VlcSnrModel(
        tx_power=tx_power,
        oe_efficiency=oe_efficiency,
        noise_psd=noise_psd,
        bandwidth=bandwidth,
        mu_vlc=mu,
        gamma_min=gamma_min,
        gamma_max=gamma_max,
    )


def intensity_at(params: VlcChannelParams, derived: VlcDerived, r):
    """Received optical intensity at horizontal offset r from the receiver.

    Zero outside the receiver's field of view (the incidence angle
    atan(r/L) exceeds the FOV exactly when r exceeds the FOV radius).
    Accepts scalars or arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0):
        raise ValueError("offset must be non-negative")
    m = derived.lambert_order
    value = derived.intensity_const / (r_arr**2 + derived.height**2) ** ((m + 3.0) / 2.0)
    value = np.where(r_arr <= derived.fov_radius, value, 0.0)
    return float(value) if np.isscalar(r) or r_arr.ndim == 0 else value


def snr_of_intensity(model: VlcSnrModel, i):
    """Electrical SNR induced by a received optical intensity (square law)."""
    i_arr = np.asarray(i, dtype=float)
    if np.any(i_arr < 0.0):
        raise ValueError("intensity must be non-negative")
    value = model.mu_vlc * i_arr**2
    return float(value) if np.isscalar(i) or i_arr.ndim == 0 else value


def vlc_snr_cdf(model: VlcSnrModel, derived: VlcDerived, gamma):
    """CDF of the SNR seen by a user placed uniformly inside the cell.

    Zero below the edge-of-cell SNR, one above the boresight SNR, and the
    uniform-disk pushforward in between. Accepts scalars or arrays;
    monotone non-decreasing with range [0, 1].
    """
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0.0):
        raise ValueError("SNR must be non-negative")
    m = derived.lambert_order
    r2 = derived.cell_radius**2
    scale = model.mu_vlc * derived.intensity_const**2
    safe = np.where(g > 0.0, g, 1.0)
    mid = 1.0 + (derived.height**2 - (scale / safe) ** (1.0 / (m + 3.0))) / r2
    mid = np.clip(mid, 0.0, 1.0)
    value = np.where(g < model.gamma_min, 0.0, np.where(g > model.gamma_max, 1.0, mid))
    return float(value) if np.isscalar(gamma) or g.ndim == 0 else value


def erasure_prob_vlc(model: VlcSnrModel, derived: VlcDerived, gamma_th: float) -> float:
    """Probability that a packet on the optical hop arrives below the decode threshold."""
    return vlc_snr_cdf(model, derived, gamma_th)


def sample_user_radius(derived: VlcDerived, rng: np.random.Generator, size=None):
    """Radial offsets of users placed uniformly over the cell disk (density 2r/r_cell^2)."""
    u = rng.random(size)
    return derived.cell_radius * np.sqrt(u)


def sample_user_placement(derived: VlcDerived, rng: np.random.Generator) -> UserPlacement:
    """One uniformly placed user, as a placement record."""
    return UserPlacement(radial_distance=float(sample_user_radius(derived, rng)))


def sample_user_snr(model: VlcSnrModel, derived: VlcDerived, rng: np.random.Generator, size=None):
    """SNR of uniformly placed users: radius draw pushed through geometry and square law.

    Every sample lies in [gamma_min, gamma_max]; the empirical distribution
    matches vlc_snr_cdf.
    """
    r = sample_user_radius(derived, rng, size)
    m = derived.lambert_order
    i = derived.intensity_const / (np.asarray(r) ** 2 + derived.height**2) ** ((m + 3.0) / 2.0)
    i = np.where(np.asarray(r) <= derived.fov_radius, i, 0.0)
    value = model.mu_vlc * i**2
    return float(value) if size is None else value

"""Run configuration: documented defaults, config files, and resolution.

Defaults follow the standard indoor-optics parameter set (90 deg FOV,
1 cm^2 photodetector, 0.4 A/W responsivity, unit filter gain, 1.5 lens
refractive index, 0.8 O/E efficiency, 1e-21 W/Hz noise PSD, 20 MHz
bandwidth). Values that set has no opinion on are tool defaults, chosen so
both hops operate strictly between their degenerate extremes: 45 deg
half-illuminance semi-angle, 2.5 m mounting height, 1 W transmit power,
an optical decode threshold of 200 (erasure ~= 0.50), Nakagami m1 = 2 at
10 dB average RF SNR with an RF threshold of 1.0 (erasure ~= 0.018), and
forwarding probability 1.

Config files are flat ``key = value`` INI text with sections [vlc], [rf],
[traffic], and [sim]. Precedence is flags > file > defaults; environment
variables are not consulted.
"""

from __future__ import annotations

import configparser
import math
import typing
from dataclasses import dataclass, fields, replace

from .rf import RfChannelParams, erasure_prob_rf
from .sim import RoomSpec, SimConfig, grid_relay_layout
from .throughput import SystemConfig
from .vlc import (
    VlcChannelParams,
    VlcDerived,
    VlcSnrModel,
    build_snr_model,
    derive_vlc,
    erasure_prob_vlc,
)


class ConfigError(ValueError):
    """A configuration file or override could not be applied."""


@dataclass(frozen=True)
class AppConfig:
    """Flat, unit-annotated user-facing configuration.

    Angles in degrees and the photodetector area in cm^2, matching the
    conventional tabulations; everything is converted to SI radians/m^2
    when the channel objects are built. ``eps_vlc``/``eps_rf`` directly
    pin an erasure probability, bypassing the corresponding threshold.
    """

    # [vlc]
    fov_deg: float = 90.0
    area_cm2: float = 1.0
    responsivity: float = 0.4
    filter_gain: float = 1.0
    refractive_index: float = 1.5
    half_angle_deg: float = 45.0
    height_m: float = 2.5
    tx_power_w: float = 1.0
    oe_efficiency: float = 0.8
    noise_psd_w_per_hz: float = 1e-21
    bandwidth_hz: float = 20e6
    gamma_th_vlc: float = 200.0
    # [rf]
    m1: float = 2.0
    mu_rf_db: float = 10.0
    gamma_th_rf: float = 1.0
    # [traffic]
    load_g: float = 1.0
    num_relays: int = 2
    forward_prob: float = 1.0
    eps_vlc: float | None = None
    eps_rf: float | None = None
    # [sim]
    num_slots: int = 200_000
    seed: int = 12345
    mode: str = "iid_erasure"
    room_width_m: float = 5.0
    room_depth_m: float = 5.0
    rf_path: str = "bernoulli"
    half_duplex: bool = False


_SECTION_FIELDS = {
    "vlc": (
        "fov_deg", "area_cm2", "responsivity", "filter_gain", "refractive_index",
        "half_angle_deg", "height_m", "tx_power_w", "oe_efficiency",
        "noise_psd_w_per_hz", "bandwidth_hz", "gamma_th_vlc",
    ),
    "rf": ("m1", "mu_rf_db", "gamma_th_rf"),
    "traffic": ("load_g", "num_relays", "forward_prob", "eps_vlc", "eps_rf"),
    "sim": (
        "num_slots", "seed", "mode", "room_width_m", "room_depth_m",
        "rf_path", "half_duplex",
    ),
}

_FIELD_TYPES = typing.get_type_hints(AppConfig)
_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


def coerce_field(name: str, raw) -> object:
    """Parse a raw string (or passthrough value) into the field's type."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {name!r}")
    target = _FIELD_TYPES[name]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if target is bool:
            low = text.lower()
            if low in _TRUE_WORDS:
                return True
            if low in _FALSE_WORDS:
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if target is int:
            return int(text)
        if target is float or target == float | None:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from exc


def load_config_file(path: str) -> dict[str, object]:
    """Parse an INI-style config file into a field->value dict."""
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SECTION_FIELDS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        allowed = _SECTION_FIELDS[section]
        for key, raw in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            values[key] = coerce_field(key, raw)
    return values


def make_app_config(
    file_values: dict[str, object] | None = None,
    overrides: dict[str, object] | None = None,
) -> AppConfig:
    """Merge defaults, config-file values, and flag overrides (in that precedence)."""
    merged: dict[str, object] = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            merged[key] = coerce_field(key, value)
    try:
        return AppConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class Resolved:
    """Channel objects and the operating point implied by an AppConfig."""

    app: AppConfig
    vlc_params: VlcChannelParams
    derived: VlcDerived
    model: VlcSnrModel
    rf: RfChannelParams
    system: SystemConfig


def resolve(app: AppConfig) -> Resolved:
    """Build channel models and derive the erasure pair from the thresholds.

    Erasures are recomputed from the thresholds on every call, so a
    resolved point can never carry stale values. When an erasure is pinned
    directly, the corresponding threshold is dropped from the provenance
    fields (it did not produce the value).
    """
    params = VlcChannelParams(
        fov_psi_max=math.radians(app.fov_deg),
        area=app.area_cm2 * 1e-4,
        responsivity=app.responsivity,
        filter_gain=app.filter_gain,
        refractive_index=app.refractive_index,
        half_angle=math.radians(app.half_angle_deg),
        height=app.height_m,
    )
    derived = derive_vlc(params)
    model = build_snr_model(
        derived, app.tx_power_w, app.oe_efficiency, app.noise_psd_w_per_hz, app.bandwidth_hz
    )
    rf = RfChannelParams(m1=app.m1, mu_rf=10.0 ** (app.mu_rf_db / 10.0))
    if app.eps_vlc is not None:
        eps_vlc, gamma_th_vlc = app.eps_vlc, None
    else:
        eps_vlc, gamma_th_vlc = erasure_prob_vlc(model, derived, app.gamma_th_vlc), app.gamma_th_vlc
    if app.eps_rf is not None:
        eps_rf, gamma_th_rf = app.eps_rf, None
    else:
        eps_rf, gamma_th_rf = erasure_prob_rf(rf, app.gamma_th_rf), app.gamma_th_rf
    system = SystemConfig(
        load_g=app.load_g,
        num_relays=app.num_relays,
        forward_prob=app.forward_prob,
        eps_vlc=eps_vlc,
        eps_rf=eps_rf,
        gamma_th_vlc=gamma_th_vlc,
        gamma_th_rf=gamma_th_rf,
    )
    return Resolved(app=app, vlc_params=params, derived=derived, model=model, rf=rf, system=system)


def build_sim_config(
    resolved: Resolved,
    *,
    num_slots: int | None = None,
    seed: int | None = None,
    relay_layout: tuple[tuple[float, float], ...] | None = None,
) -> SimConfig:
    """Assemble a simulation config from a resolved operating point."""
    app = resolved.app
    room = None
    layout: tuple[tuple[float, float], ...] = ()
    if app.mode == "geometric":
        room = RoomSpec("rect", width=app.room_width_m, depth=app.room_depth_m)
        layout = relay_layout if relay_layout is not None else grid_relay_layout(
            resolved.system.num_relays, room
        )
    return SimConfig(
        system=resolved.system,
        num_slots=app.num_slots if num_slots is None else num_slots,
        seed=app.seed if seed is None else seed,
        mode=app.mode,
        vlc_params=resolved.vlc_params,
        vlc_model=resolved.model,
        rf=resolved.rf,
        relay_layout=layout,
        room=room,
        rf_path=app.rf_path,
        half_duplex=app.half_duplex,
    )


def apply_overrides(app: AppConfig, **changes) -> AppConfig:
    """replace() with ConfigError on unknown fields, for CLI --set handling."""
    unknown = set(changes) - {f.name for f in fields(AppConfig)}
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    return replace(app, **{k: coerce_field(k, v) for k, v in changes.items()})

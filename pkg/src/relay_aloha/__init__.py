"""Two-tier relay-aided slotted ALOHA throughput toolkit.

An indoor optical uplink (Lambertian LoS cells) feeds decode-and-forward
relays that contend over a Nakagami-faded RF hop toward a common sink.
The package computes the end-to-end throughput along two independent
routes, a closed form and a truncated series, and cross-validates both
against a discrete-slot Monte Carlo simulation.
"""

from .config import AppConfig, ConfigError, Resolved, build_sim_config, make_app_config, resolve
from .numerics import (
    ConvergenceError,
    SummationAccumulator,
    golden_section_max,
    ks_statistic,
    log_binomial,
)
from .rf import RfChannelParams, erasure_prob_rf, gamma_upper_regularized, rf_snr_cdf, sample_rf_snr
from .sim import (
    ModeComparison,
    RoomSpec,
    SimConfig,
    SimOutput,
    SlotOutcome,
    ThroughputEstimate,
    TraceSummary,
    compare_modes,
    estimate_eps_vlc_geometric,
    grid_relay_layout,
    simulate,
)
from .sweep import (
    InsufficientSweepError,
    ResultRow,
    SweepSpec,
    emit_csv,
    report_trends,
    run_sweep,
    run_trend_rows,
)
from .throughput import (
    SystemConfig,
    ThroughputResult,
    ancillary_h,
    end_to_end_closed_form,
    end_to_end_series,
    optimal_load,
    p_u,
    poisson_pmf,
    uplink_throughput,
)
from .validate import GridReport, run_consistency_grid
from .vlc import (
    UserPlacement,
    VlcChannelParams,
    VlcDerived,
    VlcSnrModel,
    build_snr_model,
    derive_vlc,
    erasure_prob_vlc,
    intensity_at,
    sample_user_snr,
    snr_of_intensity,
    vlc_snr_cdf,
)

__version__ = "0.1.0"

"""Discrete-slot Monte Carlo simulation of the full two-tier protocol.

Per slot: Poisson arrivals on the optical uplink, per-relay erasures
(either i.i.d. Bernoulli or induced by shared random user positions), sole
-survivor decoding at each relay, probabilistic forwarding into the next
slot, per-packet RF erasures, and sole-survivor decoding at the sink.
Collisions are destructive at both tiers; relays do not buffer.

Slots are processed in fixed-size batches, each driven by an RNG substream
derived from (seed, batch index). Batches are independent in the default
full-duplex mode, so serial and parallel execution consume identical
streams and merge to bit-identical statistics. The optional half-duplex
mode (a relay busy forwarding is deaf for that slot) carries state across
slots and therefore always runs sequentially.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .rf import RfChannelParams, rf_snr_cdf
from .throughput import SystemConfig
from .vlc import VlcChannelParams, VlcSnrModel, derive_vlc

_BATCH_SLOTS = 65_536
# substream tags: keep slot batches, calibration draws, and erasure
# estimation on disjoint streams for one seed
_STREAM_SLOTS = 0
_STREAM_CALIBRATION = 1
_STREAM_ERASURE = 2

MODE_IID = "iid_erasure"
MODE_GEOMETRIC = "geometric"
RF_PATH_BERNOULLI = "bernoulli"
RF_PATH_NAKAGAMI = "nakagami"


def _substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, *key)))


@dataclass(frozen=True)
class RoomSpec:
    """Floor region users are drawn from, uniformly.

    Either a rectangle [0, width] x [0, depth] or a disk (the disk exists
    mainly to reproduce the single-cell geometry used for calibration).
    """

    kind: str
    width: float = 0.0
    depth: float = 0.0
    radius: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind == "rect":
            if self.width <= 0.0 or self.depth <= 0.0:
                raise ValueError("rectangular room needs positive width and depth")
        elif self.kind == "disk":
            if self.radius <= 0.0:
                raise ValueError("disk room needs a positive radius")
        else:
            raise ValueError(f"unknown room kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n user positions, uniform over the room, as an (n, 2) array."""
        if self.kind == "rect":
            pts = rng.random((n, 2))
            pts[:, 0] *= self.width
            pts[:, 1] *= self.depth
            return pts
        r = self.radius * np.sqrt(rng.random(n))
        phi = 2.0 * math.pi * rng.random(n)
        return np.column_stack(
            (self.center[0] + r * np.cos(phi), self.center[1] + r * np.sin(phi))
        )

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "rect":
            return (
                (pts[:, 0] >= 0.0)
                & (pts[:, 0] <= self.width)
                & (pts[:, 1] >= 0.0)
                & (pts[:, 1] <= self.depth)
            )
        d2 = (pts[:, 0] - self.center[0]) ** 2 + (pts[:, 1] - self.center[1]) ** 2
        return d2 <= self.radius**2 * (1.0 + 1e-12)


def grid_relay_layout(num_relays: int, room: RoomSpec) -> tuple[tuple[float, float], ...]:
    """Ceiling positions for relays on a near-square uniform grid over a rectangular room."""
    if num_relays < 1:
        raise ValueError("need at least one relay")
    if room.kind == "disk":
        if num_relays != 1:
            raise ValueError("disk rooms support a single centered relay only")
        return (room.center,)
    cols = math.ceil(math.sqrt(num_relays))
    rows = math.ceil(num_relays / cols)
    layout = []
    for idx in range(num_relays):
        i, j = idx % cols, idx // cols
        layout.append(((i + 0.5) * room.width / cols, (j + 0.5) * room.depth / rows))
    return tuple(layout)


@dataclass(frozen=True)
class SimConfig:
    """Everything a simulation run needs, RNG seed included."""

    system: SystemConfig
    num_slots: int
    seed: int
    mode: str = MODE_IID
    vlc_params: VlcChannelParams | None = None
    vlc_model: VlcSnrModel | None = None
    rf: RfChannelParams | None = None
    relay_layout: tuple[tuple[float, float], ...] = ()
    room: RoomSpec | None = None
    rf_path: str = RF_PATH_BERNOULLI
    half_duplex: bool = False

    def __post_init__(self):
        if self.num_slots < 1:
            raise ValueError(f"need at least one slot, got {self.num_slots}")
        if self.mode not in (MODE_IID, MODE_GEOMETRIC):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.rf_path not in (RF_PATH_BERNOULLI, RF_PATH_NAKAGAMI):
            raise ValueError(f"unknown RF erasure path {self.rf_path!r}")
        if self.mode == MODE_GEOMETRIC:
            if self.vlc_params is None or self.vlc_model is None:
                raise ValueError("geometric mode needs the optical channel parameters")
            if self.room is None:
                raise ValueError("geometric mode needs a room")
            if len(self.relay_layout) != self.system.num_relays:
                raise ValueError(
                    f"relay layout has {len(self.relay_layout)} positions "
                    f"for {self.system.num_relays} relays"
                )
            if self.system.gamma_th_vlc is None:
                raise ValueError("geometric mode needs the optical decode threshold")
            if not bool(np.all(self.room.contains(list(self.relay_layout)))):
                raise ValueError("room must cover every relay's floor projection")
        if self.rf_path == RF_PATH_NAKAGAMI:
            if self.rf is None or self.system.gamma_th_rf is None:
                raise ValueError("Nakagami RF path needs fading parameters and a threshold")
            implied = rf_snr_cdf(self.rf, self.system.gamma_th_rf)
            if abs(implied - self.system.eps_rf) > 1e-6:
                raise ValueError(
                    f"eps_rf={self.system.eps_rf} inconsistent with the RF threshold "
                    f"(CDF gives {implied}); both erasure paths must agree"
                )


@dataclass(frozen=True)
class ThroughputEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    num_slots: int
    mode: str


@dataclass(frozen=True)
class SlotOutcome:
    """One slot of the protocol, for trace dumps."""

    arrivals: int
    per_relay_decoded: tuple[bool, ...]
    forwarded_count: int
    sink_decoded: bool

    def __post_init__(self):
        if self.forwarded_count > sum(self.per_relay_decoded):
            raise ValueError("cannot forward more packets than were decoded")


@dataclass(frozen=True)
class TraceSummary:
    """Aggregate counters of a run."""

    num_slots: int
    mode: str
    num_batches: int
    total_arrivals: int
    total_relay_decodes: int
    total_forwarded: int
    total_sink_decodes: int
    decode_rate_per_relay: tuple[float, ...]
    mean_pairwise_decode_correlation: float | None


@dataclass(frozen=True)
class SimOutput:
    """End-to-end and per-relay-uplink estimates plus run counters."""

    end_to_end: ThroughputEstimate
    uplink: ThroughputEstimate
    trace: TraceSummary
    outcomes: tuple[SlotOutcome, ...] | None = None


class _BatchStats:
    __slots__ = (
        "n", "sink_count", "uplink_s1", "uplink_s2", "arrivals", "decodes",
        "forwarded", "decode_sums", "decode_pairs", "outcome_arrays",
    )

    def __init__(self, n, sink_count, uplink_s1, uplink_s2, arrivals, decodes,
                 forwarded, decode_sums, decode_pairs, outcome_arrays=None):
        self.n = n
        self.sink_count = sink_count
        self.uplink_s1 = uplink_s1
        self.uplink_s2 = uplink_s2
        self.arrivals = arrivals
        self.decodes = decodes
        self.forwarded = forwarded
        self.decode_sums = decode_sums
        self.decode_pairs = decode_pairs
        self.outcome_arrays = outcome_arrays


def _geometric_decode_radius_sq(cfg: SimConfig) -> float:
    """Squared horizontal offset below which a packet survives the optical hop.

    Combines the SNR threshold with the FOV cutoff. A non-positive
    threshold disables SNR-based erasures entirely (even the zero SNR
    outside the FOV is not below a zero threshold).
    """
    gth = cfg.system.gamma_th_vlc
    if gth <= 0.0:
        return math.inf
    derived = derive_vlc(cfg.vlc_params)
    model = cfg.vlc_model
    scale = model.mu_vlc * derived.intensity_const**2
    lim = (scale / gth) ** (1.0 / (derived.lambert_order + 3.0)) - derived.height**2
    fov_sq = derived.fov_radius**2
    return min(lim, fov_sq)


def _relay_arrival_counts(cfg: SimConfig, rng: np.random.Generator, u: np.ndarray) -> np.ndarray:
    """Per-(slot, relay) counts of unfaded arrivals for one batch."""
    n = u.shape[0]
    k = cfg.system.num_relays
    if cfg.mode == MODE_IID:
        # survivor counts per relay; identities of survivors never matter
        return rng.binomial(u[:, None], 1.0 - cfg.system.eps_vlc, size=(n, k))
    total = int(u.sum())
    if total == 0:
        return np.zeros((n, k), dtype=np.int64)
    pts = cfg.room.sample(rng, total)
    relays = np.asarray(cfg.relay_layout, dtype=float)
    d2 = (pts[:, 0:1] - relays[None, :, 0]) ** 2 + (pts[:, 1:2] - relays[None, :, 1]) ** 2
    r2max = _geometric_decode_radius_sq(cfg)
    unfaded = (d2 <= r2max).astype(np.int64)
    bounds = np.concatenate(([0], np.cumsum(u)))
    csum = np.vstack((np.zeros((1, k), dtype=np.int64), np.cumsum(unfaded, axis=0)))
    return csum[bounds[1:]] - csum[bounds[:-1]]


def _run_batch(cfg: SimConfig, batch_index: int, n: int, trace: bool,
               busy_in: np.ndarray | None = None):
    """Simulate one batch of n slots on its own substream.

    Returns (stats, busy_out); busy_out is only meaningful in half-duplex
    mode, where it feeds the next batch.
    """
    rng = _substream(cfg.seed, _STREAM_SLOTS, batch_index)
    sysc = cfg.system
    k = sysc.num_relays
    u = rng.poisson(sysc.load_g, n)
    counts = _relay_arrival_counts(cfg, rng, u)
    decoded = counts == 1

    if sysc.forward_prob >= 1.0:
        coin = None
    else:
        coin = rng.random((n, k)) < sysc.forward_prob

    if cfg.half_duplex:
        busy = np.zeros(k, dtype=bool) if busy_in is None else busy_in.copy()
        fwd = np.empty((n, k), dtype=bool)
        for t in range(n):
            dec_t = decoded[t] & ~busy
            decoded[t] = dec_t
            fwd[t] = dec_t if coin is None else dec_t & coin[t]
            busy = fwd[t]
        busy_out = busy
    else:
        fwd = decoded if coin is None else decoded & coin
        busy_out = None

    fcount = fwd.sum(axis=1)
    if cfg.rf_path == RF_PATH_BERNOULLI:
        if sysc.eps_rf > 0.0:
            survivors = rng.binomial(fcount, 1.0 - sysc.eps_rf)
        else:
            survivors = fcount
    else:
        snr = rng.gamma(cfg.rf.m1, cfg.rf.mu_rf / cfg.rf.m1, (n, k))
        survivors = (fwd & (snr >= sysc.gamma_th_rf)).sum(axis=1)
    sink = survivors == 1

    frac = decoded.mean(axis=1)
    dec_int = decoded.astype(np.int64)
    stats = _BatchStats(
        n=n,
        sink_count=int(sink.sum()),
        uplink_s1=float(frac.sum()),
        uplink_s2=float((frac * frac).sum()),
        arrivals=int(u.sum()),
        decodes=int(dec_int.sum()),
        forwarded=int(fcount.sum()),
        decode_sums=dec_int.sum(axis=0),
        decode_pairs=dec_int.T @ dec_int,
        outcome_arrays=(u, decoded, fcount, sink) if trace else None,
    )
    return stats, busy_out


def _estimate(s1: float, s2: float, n: int, mode: str) -> ThroughputEstimate:
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    return ThroughputEstimate(mean=mean, stderr=math.sqrt(var / n), num_slots=n, mode=mode)


def _pairwise_correlation(decode_sums: np.ndarray, decode_pairs: np.ndarray, n: int) -> float | None:
    k = decode_sums.shape[0]
    if k < 2:
        return None
    p = decode_sums / n
    var = p * (1.0 - p)
    cors = []
    for i in range(k):
        for j in range(i + 1, k):
            denom = math.sqrt(var[i] * var[j])
            if denom <= 0.0:
                continue
            cov = decode_pairs[i, j] / n - p[i] * p[j]
            cors.append(cov / denom)
    return float(np.mean(cors)) if cors else None


def simulate(cfg: SimConfig, *, workers: int = 1, trace: bool = False) -> SimOutput:
    """Run the protocol for cfg.num_slots slots.

    Deterministic given the config: identical configs produce
    bit-identical outcome streams and statistics, with any number of
    workers. ``trace=True`` additionally materializes every SlotOutcome
    (meant for small runs and debugging dumps).
    """
    n_total = cfg.num_slots
    batches = [
        (b, min(_BATCH_SLOTS, n_total - b * _BATCH_SLOTS))
        for b in range((n_total + _BATCH_SLOTS - 1) // _BATCH_SLOTS)
    ]
    if cfg.half_duplex or workers <= 1 or len(batches) == 1:
        results = []
        busy = None
        for b, nb in batches:
            stats, busy = _run_batch(cfg, b, nb, trace, busy)
            results.append(stats)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_batch, cfg, b, nb, trace) for b, nb in batches]
            results = [f.result()[0] for f in futures]

    k = cfg.system.num_relays
    sink_count = 0
    up_s1 = 0.0
    up_s2 = 0.0
    arrivals = decodes = forwarded = 0
    decode_sums = np.zeros(k, dtype=np.int64)
    decode_pairs = np.zeros((k, k), dtype=np.int64)
    for st in results:
        sink_count += st.sink_count
        up_s1 += st.uplink_s1
        up_s2 += st.uplink_s2
        arrivals += st.arrivals
        decodes += st.decodes
        forwarded += st.forwarded
        decode_sums += st.decode_sums
        decode_pairs += st.decode_pairs

    outcomes = None
    if trace:
        collected = []
        for st in results:
            u, decoded, fcount, sink = st.outcome_arrays
            for t in range(st.n):
                collected.append(
                    SlotOutcome(
                        arrivals=int(u[t]),
                        per_relay_decoded=tuple(bool(x) for x in decoded[t]),
                        forwarded_count=int(fcount[t]),
                        sink_decoded=bool(sink[t]),
                    )
                )
        outcomes = tuple(collected)

    summary = TraceSummary(
        num_slots=n_total,
        mode=cfg.mode,
        num_batches=len(batches),
        total_arrivals=arrivals,
        total_relay_decodes=decodes,
        total_forwarded=forwarded,
        total_sink_decodes=sink_count,
        decode_rate_per_relay=tuple(float(x) / n_total for x in decode_sums),
        mean_pairwise_decode_correlation=_pairwise_correlation(decode_sums, decode_pairs, n_total),
    )
    return SimOutput(
        end_to_end=_estimate(float(sink_count), float(sink_count), n_total, cfg.mode),
        uplink=_estimate(up_s1, up_s2, n_total, cfg.mode),
        trace=summary,
        outcomes=outcomes,
    )


def estimate_eps_vlc_geometric(cfg: SimConfig, num_draws: int = 100_000) -> float:
    """Empirical optical erasure fraction for the single-cell calibration geometry.

    Requires a geometric config with one relay and a disk room of the
    cell radius centered on that relay, which is exactly the geometry the
    closed-form SNR distribution describes.
    """
    if cfg.mode != MODE_GEOMETRIC:
        raise ValueError("erasure estimation needs a geometric configuration")
    if cfg.system.num_relays != 1 or cfg.room is None or cfg.room.kind != "disk":
        raise ValueError("erasure estimation needs a single relay in a disk room")
    derived = derive_vlc(cfg.vlc_params)
    if abs(cfg.room.radius - derived.cell_radius) > 1e-9 * max(derived.cell_radius, 1.0):
        raise ValueError("disk room radius must equal the optical cell radius")
    if tuple(cfg.room.center) != tuple(cfg.relay_layout[0]):
        raise ValueError("disk room must be centered on the relay")
    rng = _substream(cfg.seed, _STREAM_ERASURE)
    pts = cfg.room.sample(rng, num_draws)
    d2 = (pts[:, 0] - cfg.relay_layout[0][0]) ** 2 + (pts[:, 1] - cfg.relay_layout[0][1]) ** 2
    r2max = _geometric_decode_radius_sq(cfg)
    return float(np.mean(d2 > r2max))


@dataclass(frozen=True)
class ModeComparison:
    """Side-by-side iid vs geometric run with matched marginal erasure."""

    matched_eps_vlc: float
    calibrated_gamma_th: float
    iid: SimOutput
    geometric: SimOutput

    def to_text(self) -> str:
        lines = [
            f"matched optical erasure probability: {self.matched_eps_vlc:.6f}",
            f"calibrated optical threshold:        {self.calibrated_gamma_th:.6g}",
        ]
        for label, out in (("iid", self.iid), ("geometric", self.geometric)):
            corr = out.trace.mean_pairwise_decode_correlation
            corr_text = "n/a" if corr is None else f"{corr:+.4f}"
            lines.append(
                f"{label:>10}: end-to-end {out.end_to_end.mean:.6f} "
                f"(stderr {out.end_to_end.stderr:.2e}), uplink {out.uplink.mean:.6f}, "
                f"cross-relay decode correlation {corr_text}"
            )
        gap = self.geometric.end_to_end.mean - self.iid.end_to_end.mean
        sigma = math.hypot(self.geometric.end_to_end.stderr, self.iid.end_to_end.stderr)
        lines.append(
            f"geometric - iid throughput gap: {gap:+.6f} "
            f"({gap / sigma:+.2f} sigma)" if sigma > 0 else
            f"geometric - iid throughput gap: {gap:+.6f}"
        )
        return "\n".join(lines)


def compare_modes(cfg: SimConfig, *, calibration_draws: int = 200_000) -> ModeComparison:
    """Quantify what the shared-position geometry does to throughput.

    The analytic chain treats relay decode events as independent given the
    arrival count; geometric mode correlates them through shared user
    positions. The optical threshold is calibrated so the geometric
    per-(user, relay) erasure marginal matches the configured iid
    eps_vlc, then both modes run on the same traffic statistics.
    """
    if cfg.mode != MODE_GEOMETRIC:
        raise ValueError("mode comparison needs a geometric configuration")
    derived = derive_vlc(cfg.vlc_params)
    model = cfg.vlc_model
    rng = _substream(cfg.seed, _STREAM_CALIBRATION)
    pts = cfg.room.sample(rng, calibration_draws)
    relays = np.asarray(cfg.relay_layout, dtype=float)
    d2 = (pts[:, 0:1] - relays[None, :, 0]) ** 2 + (pts[:, 1:2] - relays[None, :, 1]) ** 2
    m = derived.lambert_order
    snr = model.mu_vlc * derived.intensity_const**2 / (d2 + derived.height**2) ** (m + 3.0)
    snr[d2 > derived.fov_radius**2] = 0.0
    eps_target = cfg.system.eps_vlc
    gamma_cal = float(np.quantile(snr.ravel(), eps_target))
    geo_cfg = replace(cfg, system=replace(cfg.system, gamma_th_vlc=gamma_cal))
    iid_cfg = replace(cfg, mode=MODE_IID)
    return ModeComparison(
        matched_eps_vlc=eps_target,
        calibrated_gamma_th=gamma_cal,
        iid=simulate(iid_cfg),
        geometric=simulate(geo_cfg),
    )

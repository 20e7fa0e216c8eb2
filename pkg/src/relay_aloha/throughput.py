"""Analytic end-to-end throughput of the two-tier relay-aided slotted ALOHA system.

Traffic is Poisson with load G packets/slot. On the optical uplink a packet
survives at a relay only if it is the sole unfaded arrival of its slot
(destructive collisions, no capture). A decoding relay forwards with
probability delta in the next slot, the forwarded copy survives the RF hop
with probability 1 - eps_rf, and the sink decodes only a sole unfaded
arrival. Two evaluation routes are provided: the truncated Poisson series
and the closed form built on an ancillary recursion, with the series
doubling as the numerically safe fallback of the closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .numerics import (
    ConvergenceError,
    SummationAccumulator,
    golden_section_max,
    log_binomial,
)

_SERIES_MAX_TERMS = 100_000


@dataclass(frozen=True)
class SystemConfig:
    """Traffic and protocol parameters of one operating point.

    The erasure pair (eps_vlc, eps_rf) drives all computations; the SNR
    thresholds that produced it are carried for provenance only and may be
    None when an erasure probability was set directly.
    """

    load_g: float
    num_relays: int
    forward_prob: float
    eps_vlc: float
    eps_rf: float
    gamma_th_vlc: float | None = None
    gamma_th_rf: float | None = None

    def __post_init__(self):
        if self.load_g < 0.0:
            raise ValueError(f"channel load must be non-negative, got {self.load_g}")
        if self.num_relays < 1 or self.num_relays != int(self.num_relays):
            raise ValueError(f"relay count must be a positive integer, got {self.num_relays}")
        for name in ("forward_prob", "eps_vlc", "eps_rf"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class ThroughputResult:
    """A throughput value plus how it was obtained.

    ``method`` is "series", "closed_form", or "fallback" (closed form
    requested but evaluated by the series for numerical safety).
    ``truncation_u_max`` is set on series evaluations.
    """

    value: float
    method: str
    truncation_u_max: int | None = None
    est_abs_error: float = 0.0


def poisson_pmf(u: int, g: float) -> float:
    """Poisson(g) probability of exactly u arrivals, computed in log space."""
    if u < 0 or u != int(u):
        raise ValueError(f"count must be a non-negative integer, got {u}")
    if g < 0.0:
        raise ValueError(f"intensity must be non-negative, got {g}")
    if g == 0.0:
        return 1.0 if u == 0 else 0.0
    return math.exp(u * math.log(g) - g - math.lgamma(u + 1))


def p_u(u: int, eps_vlc: float) -> float:
    """Probability that exactly one of u simultaneous packets survives the optical hop.

    u * (1 - eps) * eps^(u-1), with the 0^0 = 1 convention so u = 1 gives
    1 - eps even at eps = 0.
    """
    if u < 1:
        raise ValueError(f"arrival count must be >= 1, got {u}")
    return u * (1.0 - eps_vlc) * eps_vlc ** (u - 1)


def uplink_throughput(g: float, eps_vlc: float) -> float:
    """Per-relay decoded packets per slot: G(1-eps) exp(-G(1-eps)).

    Classical slotted ALOHA with the offered load thinned by erasures.
    """
    if g < 0.0:
        raise ValueError(f"channel load must be non-negative, got {g}")
    eff = g * (1.0 - eps_vlc)
    return eff * math.exp(-eff)


def _q_u(u: int, cfg: SystemConfig) -> float:
    # relay decodes, elects to forward, and the copy survives the RF hop
    return p_u(u, cfg.eps_vlc) * cfg.forward_prob * (1.0 - cfg.eps_rf)


def end_to_end_series(cfg: SystemConfig, tail_tol: float = 1e-12) -> ThroughputResult:
    """End-to-end throughput by direct summation of the Poisson mixture.

    Truncates at the smallest u with remaining Poisson tail mass below
    ``tail_tol``; since every per-arrival success probability is at most 1,
    the tail mass bounds the truncation error.
    """
    if tail_tol <= 0.0:
        raise ValueError(f"tail tolerance must be positive, got {tail_tol}")
    k = cfg.num_relays
    if cfg.load_g == 0.0:
        return ThroughputResult(0.0, "series", truncation_u_max=0, est_abs_error=0.0)
    total = 0.0
    cum = poisson_pmf(0, cfg.load_g)
    u = 0
    while 1.0 - cum > tail_tol:
        u += 1
        if u > _SERIES_MAX_TERMS:
            raise ConvergenceError(f"series truncation failed below tail_tol={tail_tol}")
        pmf = poisson_pmf(u, cfg.load_g)
        q = _q_u(u, cfg)
        total += pmf * k * q * (1.0 - q) ** (k - 1)
        cum += pmf
        if pmf == 0.0 and u > cfg.load_g:
            break
    return ThroughputResult(total, "series", truncation_u_max=u, est_abs_error=max(1.0 - cum, 0.0))


def ancillary_h(m: int, x: float) -> float:
    """Ancillary recursion: H_0(x) = e^x, H_m(x) = x * sum_l C(m-1, l) H_l(x).

    Closed-form building block; equals sum_u u^m x^u / u!. Evaluated by
    dynamic programming over the lower orders.
    """
    if m < 0 or m != int(m):
        raise ValueError(f"order must be a non-negative integer, got {m}")
    values = [math.exp(x)]
    for order in range(1, m + 1):
        acc = math.fsum(math.comb(order - 1, l) * values[l] for l in range(order))
        values.append(x * acc)
    return values[m]


def end_to_end_closed_form(
    cfg: SystemConfig,
    *,
    eps_floor: float = 1e-6,
    max_cancellation_ratio: float = 1e9,
    tail_tol: float = 1e-12,
) -> ThroughputResult:
    """End-to-end throughput via the alternating closed form.

    The closed form divides by eps_vlc and loses accuracy to cancellation
    as the alternating terms grow, so evaluation falls back to the series
    (method tag "fallback") when eps_vlc < eps_floor, when the ratio
    sum|term| / |sum term| exceeds ``max_cancellation_ratio``, or when the
    result lands outside [0, 1].
    """
    if cfg.eps_vlc < eps_floor:
        res = end_to_end_series(cfg, tail_tol)
        return replace(res, method="fallback")
    k = cfg.num_relays
    g = cfg.load_g
    ratio = cfg.forward_prob * (1.0 - cfg.eps_vlc) * (1.0 - cfg.eps_rf) / cfg.eps_vlc
    acc = SummationAccumulator()
    try:
        log_front = math.log(k) - g
        for i in range(k):
            magnitude = (
                math.exp(log_front + log_binomial(k - 1, i))
                * ratio ** (i + 1)
                * ancillary_h(i + 1, g * cfg.eps_vlc ** (i + 1))
            )
            acc.add(magnitude if i % 2 == 0 else -magnitude)
    except OverflowError:
        res = end_to_end_series(cfg, tail_tol)
        return replace(res, method="fallback")
    value = acc.total
    if (
        not math.isfinite(value)
        or not 0.0 <= value <= 1.0
        or acc.cancellation_ratio > max_cancellation_ratio
    ):
        res = end_to_end_series(cfg, tail_tol)
        return replace(res, method="fallback")
    # rounding of ~K accumulated products, scaled by how much cancelled
    est_error = acc.sum_of_abs * 1e-15 * max(k, 1)
    return ThroughputResult(value, "closed_form", truncation_u_max=None, est_abs_error=est_error)


def optimal_load(
    cfg: SystemConfig,
    g_lo: float,
    g_hi: float,
    *,
    tol: float = 1e-4,
    evaluator=None,
    coarse_points: int = 33,
    dense_points: int = 10_000,
):
    """Channel load maximizing end-to-end throughput on [g_lo, g_hi].

    A coarse scan locates a three-point bracket around the maximum, which
    golden-section search refines to within ``tol``. If the coarse scan is
    not unimodal the bracket is untrustworthy: a warning is emitted and a
    dense grid scan (``dense_points`` points) locates the maximum instead,
    with a final golden-section polish around the best grid point.

    Args:
        cfg: operating point; its load_g field is ignored.
        g_lo, g_hi: search range, 0 <= g_lo < g_hi.
        evaluator: optional override mapping a SystemConfig to a
            throughput value; defaults to the closed form (with its
            series fallback).

    Returns:
        (g_opt, s_max).
    """
    if not 0.0 <= g_lo < g_hi:
        raise ValueError(f"invalid load range [{g_lo}, {g_hi}]")
    if evaluator is None:
        evaluator = lambda c: end_to_end_closed_form(c).value

    def f(g: float) -> float:
        return evaluator(replace(cfg, load_g=g))

    xs = np.linspace(g_lo, g_hi, coarse_points)
    fs = np.array([f(x) for x in xs])
    if _looks_unimodal(fs):
        j = int(np.argmax(fs))
        lo = xs[max(j - 1, 0)]
        hi = xs[min(j + 1, coarse_points - 1)]
        return golden_section_max(f, lo, hi, tol)
    warnings.warn("coarse scan is not unimodal; falling back to dense grid", stacklevel=2)
    xd = np.linspace(g_lo, g_hi, dense_points)
    fd = np.array([f(x) for x in xd])
    j = int(np.argmax(fd))
    lo = xd[max(j - 1, 0)]
    hi = xd[min(j + 1, dense_points - 1)]
    return golden_section_max(f, lo, hi, tol)


def _looks_unimodal(fs: np.ndarray) -> bool:
    # rise-then-fall within per-sample noise: once the samples drop, a
    # later genuine rise disqualifies the bracket
    diffs = np.diff(fs)
    slack = 1e-13 * max(float(np.max(np.abs(fs))), 1.0)
    fell = False
    for d in diffs:
        if d < -slack:
            fell = True
        elif d > slack and fell:
            return False
    return True

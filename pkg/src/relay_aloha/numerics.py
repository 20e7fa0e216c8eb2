"""Shared numerical kernels.

Small, dependency-light building blocks used across the analytic and
simulation code: compensated (Neumaier) summation with cancellation
tracking, log-space binomial coefficients, regularized incomplete gamma
functions, a one-sample Kolmogorov-Smirnov statistic, and golden-section
maximization.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

_TINY = sys.float_info.min
_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 10_000


class ConvergenceError(RuntimeError):
    """An iterative kernel hit its iteration cap before converging."""


@dataclass
class SummationAccumulator:
    """Neumaier-compensated running sum that also tracks Sum|x|.

    The ratio Sum|x| / |Sum x| measures how much cancellation occurred;
    callers use it to decide whether an alternating-sum result is
    trustworthy.
    """

    running_sum: float = 0.0
    compensation: float = 0.0
    sum_of_abs: float = 0.0

    def add(self, value: float) -> None:
        t = self.running_sum + value
        if abs(self.running_sum) >= abs(value):
            self.compensation += (self.running_sum - t) + value
        else:
            self.compensation += (value - t) + self.running_sum
        self.running_sum = t
        self.sum_of_abs += abs(value)

    @property
    def total(self) -> float:
        return self.running_sum + self.compensation

    @property
    def cancellation_ratio(self) -> float:
        return self.sum_of_abs / max(abs(self.total), _TINY)


def compensated_sum(values) -> float:
    """Neumaier-compensated sum of an iterable of floats.

    Tight-loop variant of SummationAccumulator for bulk input.
    """
    s = 0.0
    c = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def log_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k) via log-gamma.

    k is reduced to min(k, n - k) first, which makes the symmetry
    C(n, k) == C(n, n - k) exact in floating point.
    """
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"log_binomial requires 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _gamma_prefactor(a: float, x: float) -> float:
    # x^a e^-x / Gamma(a), shared by both expansions
    return math.exp(a * math.log(x) - x - math.lgamma(a))


def _lower_gamma_series(a: float, x: float) -> float:
    # P(a, x) by the DLMF 8.11.4 power series; converges for all x >= 0,
    # fastest for x < a + 1.
    if x == 0.0:
        return 0.0
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            return total * _gamma_prefactor(a, x)
    raise ConvergenceError(f"lower incomplete gamma series stalled at a={a}, x={x}")


def _upper_gamma_contfrac(a: float, x: float) -> float:
    # Q(a, x) by the DLMF 8.9.2 continued fraction (modified Lentz),
    # accurate for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            return h * _gamma_prefactor(a, x)
    raise ConvergenceError(f"upper incomplete gamma continued fraction stalled at a={a}, x={x}")


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x) = Gamma(a, x)/Gamma(a).

    Power series for x < a + 1, continued fraction otherwise; absolute
    error well below 1e-10 over the supported domain.

    Raises:
        ValueError: if a <= 0 or x < 0.
        ConvergenceError: if the expansion fails to converge within the
            iteration cap (never observed for sane inputs; surfaced rather
            than silently truncated).
    """
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got a={a}")
    if x < 0.0:
        raise ValueError(f"argument must be non-negative, got x={x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_gamma_series(a, x)
    return _upper_gamma_contfrac(a, x)


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma function P(a, x) = 1 - Q(a, x).

    Evaluated by its own power series, an independent route from the
    continued-fraction branch of regularized_gamma_q. Past the exp range
    (x > 650 with x >= a + 1, where the series' unscaled partial sums
    would overflow) it degenerates to the continued-fraction complement.
    """
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got a={a}")
    if x < 0.0:
        raise ValueError(f"argument must be non-negative, got x={x}")
    if x > 650.0 and x >= a + 1.0:
        return 1.0 - _upper_gamma_contfrac(a, x)
    return _lower_gamma_series(a, x)


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)|.

    Args:
        samples: non-empty array of sample values, sorted ascending.
        cdf: target CDF; may be vectorized (preferred) or scalar-only.

    Returns:
        The sup-norm distance between the empirical CDF and ``cdf``.
    """
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("ks_statistic requires a non-empty sample")
    if s.ndim != 1:
        raise ValueError("ks_statistic expects a 1-D sample")
    if np.any(np.diff(s) < 0):
        raise ValueError("ks_statistic expects sorted samples")
    try:
        f = np.asarray(cdf(s), dtype=float)
        if f.shape != s.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.asarray([cdf(x) for x in s], dtype=float)
    n = s.size
    i = np.arange(1, n + 1, dtype=float)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1.0) / n))
    return max(d_plus, d_minus, 0.0)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float):
    """Golden-section search for the maximum of a unimodal function.

    Args:
        f: scalar function, assumed unimodal on [lo, hi] (caller-asserted).
        lo, hi: bracket with lo < hi.
        tol: final bracket width; the returned abscissa is within tol of
            the true argmax for unimodal f.

    Returns:
        (x_star, f(x_star)) at the midpoint of the final bracket.
    """
    if not lo < hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)

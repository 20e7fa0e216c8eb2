"""Engine-consistency validation grid.

Sweeps the analytic parameter space and demands that the series and the
closed form agree to a tight tolerance wherever the closed form does not
fall back. Used by the ``validate`` CLI subcommand and the acceptance
suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .throughput import SystemConfig, end_to_end_closed_form, end_to_end_series

GRID_RELAYS = tuple(range(1, 9))
GRID_LOADS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
GRID_EPS_VLC = (0.1, 0.5, 0.9)
GRID_EPS_RF = (0.0, 0.3, 0.7)
GRID_DELTA = (0.5, 1.0)


@dataclass(frozen=True)
class GridReport:
    """Outcome of one consistency run over the analytic grid."""

    points: int
    max_abs_diff: float
    tolerance: float
    fallbacks: int
    failures: tuple[tuple, ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}  series vs closed form on {self.points} grid points: "
            f"max |diff| = {self.max_abs_diff:.3e} (tolerance {self.tolerance:.0e}, "
            f"{self.fallbacks} closed-form fallbacks)"
        ]
        for k, g, ev, er, delta, diff in self.failures[:10]:
            lines.append(
                f"      K={k} G={g} eps_vlc={ev} eps_rf={er} delta={delta}: |diff|={diff:.3e}"
            )
        return "\n".join(lines)


def run_consistency_grid(
    *,
    tolerance: float = 1e-9,
    tail_tol: float = 1e-12,
    relays=GRID_RELAYS,
    loads=GRID_LOADS,
    eps_vlc_values=GRID_EPS_VLC,
    eps_rf_values=GRID_EPS_RF,
    deltas=GRID_DELTA,
) -> GridReport:
    """Compare the two analytic engines across the full parameter grid."""
    max_diff = 0.0
    points = 0
    fallbacks = 0
    failures = []
    for k, g, ev, er, delta in itertools.product(relays, loads, eps_vlc_values, eps_rf_values, deltas):
        cfg = SystemConfig(load_g=g, num_relays=k, forward_prob=delta, eps_vlc=ev, eps_rf=er)
        closed = end_to_end_closed_form(cfg, tail_tol=tail_tol)
        series = end_to_end_series(cfg, tail_tol)
        if closed.method == "fallback":
            fallbacks += 1
        diff = abs(closed.value - series.value)
        max_diff = max(max_diff, diff)
        points += 1
        if diff > tolerance:
            failures.append((k, g, ev, er, delta, diff))
    return GridReport(
        points=points,
        max_abs_diff=max_diff,
        tolerance=tolerance,
        fallbacks=fallbacks,
        failures=tuple(failures),
    )

"""Parameter sweeps, CSV emission, and trend verdicts.

A sweep varies one parameter over a value grid, resolves the full
operating point per value (erasures always recomputed, never cached), and
evaluates the requested engines: the closed form, the series, and/or the
Monte Carlo simulation. Rows keep the complete input context so trend
checks can group them; the CSV projection uses a fixed column schema.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import AppConfig, Resolved, build_sim_config, resolve
from .sim import simulate
from .throughput import end_to_end_closed_form, end_to_end_series

SWEEPABLE = ("load_g", "num_relays", "height_L", "m1", "eps_vlc", "eps_rf", "delta", "gamma_th")
ENGINES = ("closed_form", "series", "simulation")

_CSV_COLUMNS = (
    "g", "k", "delta", "gamma_th_vlc", "gamma_th_rf", "eps_vlc", "eps_rf",
    "s_closed", "s_series", "s_sim", "s_sim_stderr", "method", "seed",
)


class InsufficientSweepError(ValueError):
    """The provided rows lack an axis a trend check needs."""


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: the parameter, its values, the fixed base, and the engines."""

    parameter: str
    values: tuple[float, ...]
    base: AppConfig
    engines: tuple[str, ...] = ("closed_form", "series")
    seed: int | None = None
    num_slots: int | None = None
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.parameter!r}; choose one of {SWEEPABLE}")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        if not self.engines:
            raise ValueError("sweep needs at least one engine")
        for engine in self.engines:
            if engine not in ENGINES:
                raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
        if self.tail_tol <= 0.0:
            raise ValueError("tail tolerance must be positive")


@dataclass(frozen=True)
class ResultRow:
    """One swept value with every engine's verdict and the full input context.

    The context fields beyond the CSV schema (height_l, m1, mu_rf) let
    trend checks group rows from concatenated sweeps.
    """

    parameter: str
    value: float
    g: float | None
    k: int | None
    delta: float | None
    gamma_th_vlc: float | None
    gamma_th_rf: float | None
    eps_vlc: float | None
    eps_rf: float | None
    height_l: float | None
    m1: float | None
    mu_rf: float | None
    s_closed: float | None
    s_series: float | None
    s_sim: float | None
    s_sim_stderr: float | None
    method: str
    seed: int | None
    error: str | None = None


def apply_parameter(base: AppConfig, parameter: str, value: float) -> AppConfig:
    """Return the base configuration with one swept parameter applied."""
    if parameter == "load_g":
        return replace(base, load_g=float(value))
    if parameter == "num_relays":
        k = int(round(value))
        if abs(value - k) > 1e-9 or k < 1:
            raise ValueError(f"relay count must be a positive integer, got {value}")
        return replace(base, num_relays=k)
    if parameter == "height_L":
        return replace(base, height_m=float(value))
    if parameter == "m1":
        return replace(base, m1=float(value))
    if parameter == "eps_vlc":
        return replace(base, eps_vlc=float(value))
    if parameter == "eps_rf":
        return replace(base, eps_rf=float(value))
    if parameter == "delta":
        return replace(base, forward_prob=float(value))
    if parameter == "gamma_th":
        return replace(base, gamma_th_vlc=float(value), gamma_th_rf=float(value))
    raise ValueError(f"cannot sweep {parameter!r}")


def _point_seed(master: int, index: int) -> int:
    # stable per-point substream identity, independent of evaluation order
    return int(np.random.SeedSequence(entropy=(master, index)).generate_state(1, np.uint64)[0])


def _evaluate_point(spec: SweepSpec, index: int, value: float) -> ResultRow:
    master = spec.seed if spec.seed is not None else spec.base.seed
    seed = _point_seed(master, index)
    try:
        app = apply_parameter(spec.base, spec.parameter, value)
        resolved: Resolved = resolve(app)
    except ValueError as exc:
        return ResultRow(
            parameter=spec.parameter, value=float(value), g=None, k=None, delta=None,
            gamma_th_vlc=None, gamma_th_rf=None, eps_vlc=None, eps_rf=None,
            height_l=None, m1=None, mu_rf=None, s_closed=None, s_series=None,
            s_sim=None, s_sim_stderr=None, method="error", seed=None, error=str(exc),
        )
    sysc = resolved.system
    s_closed = s_series = s_sim = s_sim_stderr = None
    method = ""
    row_seed = None
    error = None
    try:
        if "closed_form" in spec.engines:
            res = end_to_end_closed_form(sysc, tail_tol=spec.tail_tol)
            s_closed, method = res.value, res.method
        if "series" in spec.engines:
            res = end_to_end_series(sysc, spec.tail_tol)
            s_series = res.value
            if not method:
                method = res.method
        if "simulation" in spec.engines:
            row_seed = seed
            out = simulate(build_sim_config(resolved, num_slots=spec.num_slots, seed=seed))
            s_sim, s_sim_stderr = out.end_to_end.mean, out.end_to_end.stderr
    except ValueError as exc:
        method, error = "error", str(exc)
    return ResultRow(
        parameter=spec.parameter,
        value=float(value),
        g=sysc.load_g,
        k=sysc.num_relays,
        delta=sysc.forward_prob,
        gamma_th_vlc=sysc.gamma_th_vlc,
        gamma_th_rf=sysc.gamma_th_rf,
        eps_vlc=sysc.eps_vlc,
        eps_rf=sysc.eps_rf,
        height_l=app.height_m,
        m1=app.m1,
        mu_rf=resolved.rf.mu_rf,
        s_closed=s_closed,
        s_series=s_series,
        s_sim=s_sim,
        s_sim_stderr=s_sim_stderr,
        method=method,
        seed=row_seed,
        error=error,
    )


def run_sweep(spec: SweepSpec, *, workers: int = 1) -> list[ResultRow]:
    """Evaluate every swept value; rows come back ordered by swept value.

    Each point owns a seed derived from (master seed, point index), so
    concurrent evaluation returns exactly the rows serial evaluation
    would. Per-point errors are recorded in the row; the run continues.
    """
    order = sorted(range(len(spec.values)), key=lambda i: spec.values[i])
    tasks = [(rank, spec.values[i]) for rank, i in enumerate(order)]
    if workers <= 1:
        return [_evaluate_point(spec, rank, v) for rank, v in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_evaluate_point, spec, rank, v) for rank, v in tasks]
        return [f.result() for f in futures]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".12g")


def render_csv(rows: list[ResultRow]) -> str:
    """Rows as RFC-4180-style CSV text with the fixed column schema.

    First column is the swept parameter, floats carry 12 significant
    digits, and absent engine values stay empty (absence is not zero).
    Byte-deterministic for identical rows.
    """
    if not rows:
        raise ValueError("no rows to emit")
    parameter = rows[0].parameter
    if any(r.parameter != parameter for r in rows):
        raise ValueError("rows mix different swept parameters")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((parameter,) + _CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [_fmt(r.value)]
            + [_fmt(getattr(r, col)) if col != "method" else r.method for col in _CSV_COLUMNS]
        )
    return buf.getvalue()


def emit_csv(rows: list[ResultRow], path: str) -> None:
    """Write render_csv(rows) to path; I/O failures carry the path."""
    text = render_csv(rows)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc


def _row_value(row: ResultRow) -> float | None:
    for attr in ("s_closed", "s_series", "s_sim"):
        v = getattr(row, attr)
        if v is not None:
            return v
    return None


def _load_groups(rows, key_fields, group_field):
    """Map context-key -> {group value -> [(g, s), ...]} over load-swept rows."""
    table: dict = {}
    for r in rows:
        if r.parameter != "load_g" or r.error is not None:
            continue
        s = _row_value(r)
        if s is None or r.g is None:
            continue
        ctx = tuple(getattr(r, f) for f in key_fields)
        group = getattr(r, group_field)
        table.setdefault(ctx, {}).setdefault(group, []).append((r.g, s))
    return table


def _grid_argmax(points) -> float:
    pts = sorted(points)
    best_g, best_s = pts[0]
    for g, s in pts:
        if s > best_s:
            best_g, best_s = g, s
    return best_g


def _grid_max(points) -> float:
    return max(s for _, s in points)


_CTX_K = ("height_l", "m1", "mu_rf", "delta", "gamma_th_vlc", "gamma_th_rf")
_CTX_HEIGHT = ("k", "m1", "mu_rf", "delta", "gamma_th_vlc", "gamma_th_rf")
_CTX_M1 = ("k", "height_l", "mu_rf", "delta", "gamma_th_vlc", "gamma_th_rf")


def report_trends(rows: list[ResultRow]) -> str:
    """PASS/FAIL verdicts for the four qualitative behaviors of the system.

    T1: at low load (G <= 0.5) a single relay beats four relays.
    T2: the optimal load increases with the relay count.
    T3: the optimal load increases with the mounting height.
    T4: near-peak throughput increases with the fading parameter at K=2.

    Optimal loads are read off the sweep grid (grid argmax). Raises
    InsufficientSweepError when the rows lack an axis.
    """
    verdicts = []

    by_k = _load_groups(rows, _CTX_K, "k")
    ctx_k = next((c for c, groups in by_k.items() if 1 in groups and 4 in groups), None)
    if ctx_k is None:
        raise InsufficientSweepError("T1 needs load sweeps at K=1 and K=4 in a shared context")
    groups = by_k[ctx_k]
    s1 = {g: s for g, s in groups[1] if g <= 0.5}
    s4 = {g: s for g, s in groups[4] if g <= 0.5}
    common = sorted(set(s1) & set(s4))
    if not common:
        raise InsufficientSweepError("T1 needs load-sweep points at G <= 0.5")
    t1 = all(s1[g] >= s4[g] - 1e-12 for g in common)
    verdicts.append(("T1 low-load relay penalty: S(K=1) >= S(K=4) for G <= 0.5", t1))

    ctx_k2 = next((c for c, groups in by_k.items() if len(groups) >= 2), None)
    if ctx_k2 is None:
        raise InsufficientSweepError("T2 needs load sweeps at two or more relay counts")
    gopt_by_k = sorted((k, _grid_argmax(pts)) for k, pts in by_k[ctx_k2].items())
    t2 = all(b[1] > a[1] for a, b in zip(gopt_by_k, gopt_by_k[1:]))
    detail = ", ".join(f"K={k}: G_opt={g:.3g}" for k, g in gopt_by_k)
    verdicts.append((f"T2 G_opt increasing in K ({detail})", t2))

    by_height = _load_groups(rows, _CTX_HEIGHT, "height_l")
    ctx_h = next((c for c, groups in by_height.items() if len(groups) >= 2), None)
    if ctx_h is None:
        raise InsufficientSweepError("T3 needs load sweeps at two or more mounting heights")
    gopt_by_h = sorted((h, _grid_argmax(pts)) for h, pts in by_height[ctx_h].items())
    t3 = all(b[1] > a[1] for a, b in zip(gopt_by_h, gopt_by_h[1:]))
    detail = ", ".join(f"L={h:.3g}: G_opt={g:.3g}" for h, g in gopt_by_h)
    verdicts.append((f"T3 G_opt increasing in L ({detail})", t3))

    by_m1 = _load_groups(rows, _CTX_M1, "m1")
    ctx_m = next(
        (c for c, groups in by_m1.items()
         if len(groups) >= 2 and c[0] == 2),
        None,
    )
    if ctx_m is None:
        raise InsufficientSweepError("T4 needs load sweeps at K=2 for two or more m1 values")
    peak_by_m1 = sorted((m1, _grid_max(pts)) for m1, pts in by_m1[ctx_m].items())
    t4 = all(b[1] > a[1] for a, b in zip(peak_by_m1, peak_by_m1[1:]))
    detail = ", ".join(f"m1={m:.3g}: S_peak={s:.4g}" for m, s in peak_by_m1)
    verdicts.append((f"T4 near-peak throughput increasing in m1 at K=2 ({detail})", t4))

    return "\n".join(f"{'PASS' if ok else 'FAIL'}  {text}" for text, ok in verdicts)


def run_trend_rows(
    base: AppConfig,
    *,
    load_grid=None,
    relay_counts=(1, 2, 4),
    heights=(2.0, 2.5, 3.0),
    m1_values=(0.5, 1.0, 2.0, 4.0),
    workers: int = 1,
) -> list[ResultRow]:
    """Run the load sweeps the trend checks need and return all rows."""
    if load_grid is None:
        load_grid = tuple(np.linspace(0.1, 8.0, 80))
    rows: list[ResultRow] = []

    def load_sweep(cfg: AppConfig) -> list[ResultRow]:
        spec = SweepSpec("load_g", tuple(load_grid), cfg, engines=("closed_form",))
        return run_sweep(spec, workers=workers)

    for k in relay_counts:
        rows += load_sweep(replace(base, num_relays=k))
    for height in heights:
        rows += load_sweep(replace(base, num_relays=2, height_m=height))
    for m1 in m1_values:
        rows += load_sweep(replace(base, num_relays=2, m1=m1))
    return rows

"""Command-line interface.

Subcommands:
    analyze        one operating point through every requested engine
    sweep          parameter sweep to CSV (plus a rendered figure)
    validate       engine-consistency grid and, optionally, trend checks
    compare-modes  geometric vs iid simulation with matched erasure marginal

Exit codes: 0 success, 1 configuration error, 2 numerical failure or
failed validation, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import AppConfig, ConfigError, apply_overrides, build_sim_config, load_config_file, make_app_config
from .numerics import ConvergenceError
from .sim import compare_modes, simulate
from .sweep import SweepSpec, emit_csv, report_trends, run_sweep, run_trend_rows
from .throughput import end_to_end_closed_form, end_to_end_series
from .validate import run_consistency_grid

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="INI config file (flags override it)")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--slots", type=int, help="simulation slots per point")
    parser.add_argument(
        "--set", metavar="KEY=VALUE", action="append", default=[],
        help="override any configuration key, e.g. --set num_relays=4",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relay-aloha",
        description="Two-tier relay-aided slotted ALOHA throughput: analysis and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="evaluate a single operating point")
    _add_common(p)
    p.add_argument("--engines", default="closed_form,series,simulation",
                   help="comma list from closed_form,series,simulation")
    p.add_argument("--tail-tol", type=float, default=1e-12, help="series tail tolerance")
    p.add_argument("--trace-out", metavar="CSV",
                   help="dump the per-slot outcome stream (debugging; implies simulation)")

    p = sub.add_parser("sweep", help="sweep one parameter and emit CSV (+ figure)")
    _add_common(p)
    p.add_argument("--param", required=True, help="parameter to sweep")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--range", dest="value_range", metavar="LO:HI:STEPS",
                   help="evenly spaced values, e.g. 0.1:8:80")
    p.add_argument("--engines", default="closed_form,series",
                   help="comma list from closed_form,series,simulation")
    p.add_argument("--tail-tol", type=float, default=1e-12, help="series tail tolerance")
    p.add_argument("--out", metavar="CSV", help="output CSV path (stdout if omitted)")
    p.add_argument("--no-plot", action="store_true", help="skip the figure next to the CSV")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep-point workers")

    p = sub.add_parser("validate", help="run the engine-consistency grid (PASS/FAIL)")
    _add_common(p)
    p.add_argument("--tail-tol", type=float, default=1e-12, help="series tail tolerance")
    p.add_argument("--with-trends", action="store_true",
                   help="also check the qualitative trends T1-T4")

    p = sub.add_parser("compare-modes", help="geometric vs iid simulation report")
    _add_common(p)

    return parser


def _app_from_args(args) -> AppConfig:
    file_values = load_config_file(args.config) if args.config else None
    app = make_app_config(file_values)
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if overrides:
        app = apply_overrides(app, **overrides)
    if args.seed is not None:
        app = replace(app, seed=args.seed)
    if args.slots is not None:
        app = replace(app, num_slots=args.slots)
    return app


def _parse_engines(text: str) -> tuple[str, ...]:
    engines = tuple(e.strip() for e in text.split(",") if e.strip())
    if not engines:
        raise ConfigError("at least one engine is required")
    return engines


def _cmd_analyze(args) -> int:
    from .config import resolve

    app = _app_from_args(args)
    engines = _parse_engines(args.engines)
    resolved = resolve(app)
    sysc = resolved.system
    print(f"operating point: G={sysc.load_g:g}, K={sysc.num_relays}, delta={sysc.forward_prob:g}")
    th_v = "direct" if sysc.gamma_th_vlc is None else f"gamma_th={sysc.gamma_th_vlc:g}"
    th_r = "direct" if sysc.gamma_th_rf is None else f"gamma_th={sysc.gamma_th_rf:g}"
    print(f"eps_vlc={sysc.eps_vlc:.6f} ({th_v}), eps_rf={sysc.eps_rf:.6f} ({th_r})")
    if "closed_form" in engines:
        res = end_to_end_closed_form(sysc, tail_tol=args.tail_tol)
        print(f"closed_form: {res.value:.12g}  [{res.method}]")
    if "series" in engines:
        res = end_to_end_series(sysc, args.tail_tol)
        print(f"series:      {res.value:.12g}  (u_max={res.truncation_u_max}, "
              f"tail<={res.est_abs_error:.1e})")
    if "simulation" in engines or args.trace_out:
        out = simulate(build_sim_config(resolved), trace=bool(args.trace_out))
        est = out.end_to_end
        print(f"simulation:  {est.mean:.6f} +/- {est.stderr:.6f}  "
              f"({est.num_slots} slots, {est.mode}, seed={app.seed})")
        print(f"uplink/relay: {out.uplink.mean:.6f} +/- {out.uplink.stderr:.6f}")
        if args.trace_out:
            _write_trace(out.outcomes, args.trace_out)
            print(f"wrote {len(out.outcomes)} slot records to {args.trace_out}")
    return EXIT_OK


def _write_trace(outcomes, path: str) -> None:
    import csv

    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("slot", "arrivals", "relay_decoded", "forwarded", "sink_decoded"))
            for t, slot in enumerate(outcomes):
                decoded = "".join("1" if d else "0" for d in slot.per_relay_decoded)
                writer.writerow((t, slot.arrivals, decoded, slot.forwarded_count,
                                 int(slot.sink_decoded)))
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def _parse_values(args) -> tuple[float, ...]:
    if args.values and args.value_range:
        raise ConfigError("use either --values or --range, not both")
    if args.values:
        try:
            return tuple(float(v) for v in args.values.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"bad --values: {exc}") from exc
    if args.value_range:
        parts = args.value_range.split(":")
        if len(parts) != 3:
            raise ConfigError("--range expects LO:HI:STEPS")
        try:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad --range: {exc}") from exc
        if steps < 1 or hi < lo:
            raise ConfigError("--range expects LO <= HI and STEPS >= 1")
        if steps == 1:
            return (lo,)
        return tuple(lo + i * (hi - lo) / (steps - 1) for i in range(steps))
    raise ConfigError("sweep needs --values or --range")


def _cmd_sweep(args) -> int:
    from .sweep import render_csv

    app = _app_from_args(args)
    spec = SweepSpec(
        parameter=args.param,
        values=_parse_values(args),
        base=app,
        engines=_parse_engines(args.engines),
        tail_tol=args.tail_tol,
    )
    rows = run_sweep(spec, workers=max(args.jobs, 1))
    if args.out:
        emit_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
        if not args.no_plot:
            from .plots import render_sweep_figure

            fig_path = str(Path(args.out).with_suffix(".png"))
            render_sweep_figure(rows, fig_path)
            print(f"wrote figure to {fig_path}")
    else:
        sys.stdout.write(render_csv(rows))
    bad = [r for r in rows if r.error is not None]
    if bad:
        print(f"note: {len(bad)} of {len(rows)} points recorded errors", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args) -> int:
    app = _app_from_args(args)
    report = run_consistency_grid(tail_tol=args.tail_tol)
    print(report.to_text())
    ok = report.passed
    if args.with_trends:
        rows = run_trend_rows(app)
        text = report_trends(rows)
        print(text)
        ok = ok and ("FAIL" not in text)
    return EXIT_OK if ok else EXIT_NUMERICAL


def _cmd_compare_modes(args) -> int:
    from .config import resolve

    app = _app_from_args(args)
    app = replace(app, mode="geometric")
    resolved = resolve(app)
    cfg = build_sim_config(resolved)
    print(compare_modes(cfg).to_text())
    return EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "compare-modes": _cmd_compare_modes,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

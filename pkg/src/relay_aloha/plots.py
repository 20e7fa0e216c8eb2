"""Figure rendering for sweep results.

Renders throughput-vs-parameter curves from sweep rows to an image file
next to the CSV. Uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

_ENGINE_STYLE = {
    "s_closed": dict(label="closed form", linestyle="-", marker=""),
    "s_series": dict(label="series", linestyle="--", marker=""),
}


def render_sweep_figure(rows, path: str, *, title: str | None = None) -> None:
    """Plot every engine column present in the rows against the swept value.

    Rows from concatenated sweeps are split into one curve per relay
    count. Simulation points get error bars at +/- one standard error.
    """
    if not rows:
        raise ValueError("no rows to plot")
    parameter = rows[0].parameter
    groups: dict[int | None, list] = {}
    for r in rows:
        if r.error is not None:
            continue
        groups.setdefault(r.k, []).append(r)
    if not groups:
        raise ValueError("every row is errored; nothing to plot")

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    for k, group in sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0])):
        group = sorted(group, key=lambda r: r.value)
        suffix = f" (K={k})" if len(groups) > 1 else ""
        for attr, style in _ENGINE_STYLE.items():
            pts = [(r.value, getattr(r, attr)) for r in group if getattr(r, attr) is not None]
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, label=style["label"] + suffix, linestyle=style["linestyle"])
        sim_pts = [(r.value, r.s_sim, r.s_sim_stderr) for r in group if r.s_sim is not None]
        if sim_pts:
            xs, ys, es = zip(*sim_pts)
            ax.errorbar(
                xs, ys, yerr=es, fmt="o", markersize=3.5, capsize=2.5,
                label="simulation" + suffix, linestyle="none",
            )
    ax.set_xlabel(parameter)
    ax.set_ylabel("end-to-end throughput [pk/slot]")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    try:
        fig.savefig(path, dpi=150)
    except OSError as exc:
        raise OSError(f"cannot write figure to {path}: {exc}") from exc
    finally:
        plt.close(fig)

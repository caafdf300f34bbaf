"""Render a report to a figure file next to its delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import Report

__all__ = ["render_report"]


def _axis_choice(rows):
    """Pick the swept quantity: gamma, n, then m; None means a bar chart."""
    if len({r.gamma for r in rows if r.gamma is not None}) > 1:
        return "gamma"
    if len({r.n for r in rows}) > 1:
        return "n"
    if len({r.m for r in rows}) > 1:
        return "m"
    return None


def render_report(report: Report, path: str) -> None:
    """One PNG/PDF/SVG (by extension) summarizing the report rows.

    Sweeps plot one line per (scenario, estimator); gamma sweeps show
    relative improvement on a log-2 axis, other sweeps and single-point
    reports show error rates with standard-error bars.
    """
    rows = report.rows
    if not rows:
        raise ValueError("cannot render an empty report")
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    axis = _axis_choice(rows)
    if axis is None:
        labels = [f"{r.estimator}\n({r.scenario})" for r in rows]
        ax.bar(
            range(len(rows)),
            [r.error_rate for r in rows],
            yerr=[r.std_err for r in rows],
            capsize=3,
        )
        ax.set_xticks(range(len(rows)), labels, fontsize=8)
        ax.set_ylabel("error rate")
    else:
        series: dict[tuple[str, str], list] = {}
        for r in rows:
            series.setdefault((r.scenario, r.estimator), []).append(r)
        improvement = axis == "gamma"
        for (scenario, estimator), group in series.items():
            group = sorted(group, key=lambda r: getattr(r, axis))
            xs = [getattr(r, axis) for r in group]
            if improvement:
                ys = [r.rel_improvement_pct for r in group]
                err = None
            else:
                ys = [r.error_rate for r in group]
                err = [r.std_err for r in group]
            label = f"{estimator} ({scenario})" if len(series) > 1 else estimator
            ax.errorbar(xs, ys, yerr=err, marker="o", capsize=3, label=label)
        if improvement:
            ax.set_xscale("log", base=2)
            ax.set_ylabel("improvement over random guess (%)")
        else:
            ax.set_ylabel("mean loss / error rate")
        ax.set_xlabel(axis)
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

"""Figure rendering for sweep reports.

Uses the object-oriented matplotlib API with an explicit Agg canvas so no
global backend state is touched; safe to call from headless processes.
"""

from __future__ import annotations

import os

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .model import Scenario
from .optimize import SweepTable
from .rates import (
    HELSTROM_ASYMPTOTIC_DEPTH,
    chi_optimum,
    gamma_optimum,
)

_STYLE = {
    Scenario.DIRECT_DETECTION: ("tab:blue", "direct detection"),
    Scenario.COHERENT: ("tab:orange", "coherent (homodyne)"),
    Scenario.HELSTROM: ("tab:green", "Helstrom"),
    Scenario.HOLEVO: ("tab:red", "Holevo bound"),
}

# Depths the optimum settles to as the advantage grows, per scenario.
_DEPTH_REFS = {
    Scenario.DIRECT_DETECTION: lambda: gamma_optimum().argmax,
    Scenario.HELSTROM: lambda: HELSTROM_ASYMPTOTIC_DEPTH,
    Scenario.HOLEVO: lambda: chi_optimum().argmax,
}


def _split_ok(rows):
    """Rows with a computed rate, split into plottable arrays."""
    xs, ks, kas, dbs, des = [], [], [], [], []
    for row in rows:
        if row.error is not None:
            continue
        xs.append(row.advantage)
        ks.append(row.key_rate)
        kas.append(row.key_rate_asymptotic)
        dbs.append(row.delta_b_opt)
        des.append(row.delta_e_opt)
    return xs, ks, kas, dbs, des


def plot_rate_curves(table: SweepTable, path: str) -> None:
    """Log-log optimized key rate vs advantage, exact and asymptotic."""
    fig = Figure(figsize=(6.4, 4.4))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    for scenario in Scenario:
        rows = table.scenario_rows(scenario)
        if not rows:
            continue
        color, label = _STYLE[scenario]
        xs, ks, kas, _, _ = _split_ok(rows)
        pos = [(x, k) for x, k in zip(xs, ks) if k > 0.0]
        if pos:
            ax.loglog(*zip(*pos), color=color, marker="o", ms=3.0, lw=1.2, label=label)
        apos = [(x, k) for x, k in zip(xs, kas) if k > 0.0]
        if apos:
            ax.loglog(*zip(*apos), color=color, ls="--", lw=1.0, alpha=0.7)
    ax.set_xlabel("eavesdropper noise advantage")
    ax.set_ylabel("key rate (bits / round)")
    ax.legend(fontsize=8, framealpha=0.9)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def plot_depth_curves(table: SweepTable, path: str) -> None:
    """Optimal eavesdropper depth vs advantage, with large-advantage levels."""
    fig = Figure(figsize=(6.4, 4.4))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    for scenario in Scenario:
        rows = table.scenario_rows(scenario)
        if not rows:
            continue
        color, label = _STYLE[scenario]
        xs, _, _, _, des = _split_ok(rows)
        if xs:
            ax.semilogx(xs, des, color=color, marker="o", ms=3.0, lw=1.2, label=label)
        ref = _DEPTH_REFS.get(scenario)
        if ref is not None and xs:
            ax.axhline(ref(), color=color, ls=":", lw=0.9, alpha=0.6)
    ax.set_xlabel("eavesdropper noise advantage")
    ax.set_ylabel("optimal eavesdropper depth")
    ax.legend(fontsize=8, framealpha=0.9)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def render_sweep_figures(table: SweepTable, csv_path: str) -> list[str]:
    """Write the rate and depth panels next to ``csv_path``.

    Returns the written file paths, ``<stem>_rates.png`` then
    ``<stem>_depths.png``.
    """
    stem, _ = os.path.splitext(csv_path)
    paths = [stem + "_rates.png", stem + "_depths.png"]
    plot_rate_curves(table, paths[0])
    plot_depth_curves(table, paths[1])
    return paths

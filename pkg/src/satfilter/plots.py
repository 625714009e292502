"""Render analysis outputs to image files (Agg backend, no display).

The statistics modules only emit numbers; everything visual lives here so
the report path of the CLI can drop figures next to the CSVs.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diversity import CrossPairStats, DiversityCurve
from .harness import EffortRecord, runs_needed_99

_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def plot_curves(
    curves: Sequence[DiversityCurve],
    path: str | Path,
    xlabel: str,
    ylabel: str,
    title: str | None = None,
    reference: tuple[np.ndarray, np.ndarray, str] | None = None,
    logy: bool = False,
) -> None:
    """Errorbar plot of instance-averaged curves, one series per curve."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for i, curve in enumerate(curves):
        label = curve.solver
        if curve.selection not in ("runs",):
            label = f"{curve.solver} ({curve.selection})"
        ax.errorbar(
            curve.x, curve.mean, yerr=curve.stderr,
            label=label, color=_COLORS[i % len(_COLORS)],
            marker="o", markersize=3, linewidth=1.2, capsize=2,
        )
    if reference is not None:
        ref_x, ref_y, ref_label = reference
        ax.plot(ref_x, ref_y, "k:", linewidth=1.2, label=ref_label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_effort(records: Sequence[EffortRecord], path: str | Path) -> None:
    """Effort-to-99% versus n, log scale, one series per solver.

    Sizes where a solver never succeeded have no finite effort; they are
    marked at the top of the axis with an open symbol.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    solvers = sorted({r.solver for r in records})
    finite = [r.effort_99 for r in records if math.isfinite(r.effort_99)]
    top = max(finite) * 3 if finite else 1.0
    for i, solver in enumerate(solvers):
        rows = sorted((r for r in records if r.solver == solver), key=lambda r: r.n)
        xs = [r.n for r in rows if math.isfinite(r.effort_99)]
        ys = [r.effort_99 for r in rows if math.isfinite(r.effort_99)]
        lo, hi = [], []
        for r in rows:
            if not math.isfinite(r.effort_99):
                continue
            # effort is monotone decreasing in p, so p +/- stderr brackets it
            p_hi = min(1.0, r.success_probability + r.stderr)
            p_lo = max(0.0, r.success_probability - r.stderr)
            best = r.mcs_per_run * runs_needed_99(p_hi) if p_hi > 0 else math.inf
            worst = r.mcs_per_run * runs_needed_99(p_lo) if p_lo > 0 else top
            lo.append(max(0.0, r.effort_99 - best))
            hi.append(max(0.0, min(worst, top) - r.effort_99))
        color = _COLORS[i % len(_COLORS)]
        if xs:
            ax.errorbar(xs, ys, yerr=[lo, hi], label=solver, color=color,
                        marker="o", markersize=4, linewidth=1.2, capsize=2)
        dead = [r.n for r in rows if not math.isfinite(r.effort_99)]
        if dead:
            ax.plot(dead, [top] * len(dead), marker="^", linestyle="none",
                    markerfacecolor="none", color=color,
                    label=f"{solver} (no success)")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("sweeps to 99% success")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_cross_table(
    table: Mapping[tuple[str, str], CrossPairStats | None],
    path: str | Path,
    baseline: float | None = None,
) -> None:
    """Heatmap of mean cross-solver Hamming distances with value labels."""
    names = sorted({name for pair in table for name in pair})
    size = len(names)
    grid = np.full((size, size), np.nan)
    for (a, b), entry in table.items():
        if entry is None:
            continue
        i, j = names.index(a), names.index(b)
        grid[i, j] = entry.mean
        grid[j, i] = entry.mean
    fig, ax = plt.subplots(figsize=(1.6 + size, 1.2 + size))
    shown = ax.imshow(grid, cmap="viridis")
    ax.set_xticks(range(size), names)
    ax.set_yticks(range(size), names)
    for i in range(size):
        for j in range(size):
            if np.isnan(grid[i, j]):
                text = "n/a"
            else:
                entry = table.get((min(names[i], names[j]), max(names[i], names[j])))
                text = f"{entry.mean:.1f}±{entry.stderr:.1f}"
            ax.text(j, i, text, ha="center", va="center", color="w", fontsize=8)
    label = "mean pairwise Hamming distance"
    if baseline is not None:
        label += f" (independent: {baseline:g})"
    fig.colorbar(shown, ax=ax, label=label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

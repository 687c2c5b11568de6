"""Turn hybrid-ug CSV bundles into figure images.

Three renderers, one per figure type:

- ``plot_lines``: fairness-fraction curves vs AI count (fig1/fig7 CSVs),
  one panel per selection intensity, proposer and receiver curves.
- ``plot_heatmap``: a stationary-mass heatmap over the (M_P, M_R) grid
  (fig3-style sweep CSVs), with an optional M_P + M_R = c overlay line.
- ``plot_histogram``: per-state frequency histograms of stationary masses
  binned in [0, 1] (fig4/fig9-style sweep CSVs); prints the top-bin
  fraction per state, obtained purely by counting rows.

Everything is a deterministic file-to-file transform; no value is ever
recomputed from model parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

SWEEP_MASS_COLUMNS = ("pi_HH", "pi_HL", "pi_LH", "pi_LL")
LINES_COLUMNS = ("vary", "M", "beta", "role", "fraction")
HEATMAP_KEY_COLUMNS = ("M_P", "M_R", "beta")


class SchemaError(ValueError):
    """Input CSV does not have the expected shape."""


@dataclass(frozen=True)
class FigureJob:
    """One rendering task: input CSVs, output image, style options."""

    figure: str
    inputs: tuple[Path, ...]
    output: Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def _load(path: Path, required: tuple[str, ...]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: empty CSV") from None
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")
    return frame


def plot_lines(job: FigureJob) -> Path:
    """Fairness-fraction curves: one panel per beta, one panel row per
    varied AI-count axis, proposer and receiver curves in each panel."""
    frame = _load(job.inputs[0], LINES_COLUMNS)
    varies = sorted(frame["vary"].unique())
    betas = sorted(frame["beta"].unique())
    fig, axes = plt.subplots(
        len(varies), len(betas),
        figsize=(3.2 * len(betas), 2.8 * len(varies)),
        squeeze=False, sharey=True,
    )
    colors = {"proposer": "tab:blue", "receiver": "tab:orange"}
    for i, vary in enumerate(varies):
        for j, beta in enumerate(betas):
            ax = axes[i][j]
            panel = frame[(frame["vary"] == vary) & (frame["beta"] == beta)]
            for role, sub in panel.groupby("role"):
                sub = sub.sort_values("M")
                ax.plot(sub["M"], sub["fraction"], label=role,
                        color=colors.get(role))
            ax.set_ylim(-0.05, 1.05)
            ax.set_title(f"{vary}, beta={beta:g}", fontsize=9)
            if i == len(varies) - 1:
                ax.set_xlabel(job.style.get("xlabel", "AI count M"))
            if j == 0:
                ax.set_ylabel(job.style.get("ylabel", "H fraction"))
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.style.get("dpi", 150))
    plt.close(fig)
    return job.output


def plot_heatmap(job: FigureJob) -> Path:
    """Stationary-mass heatmap over the (M_P, M_R) grid, one panel per
    beta, optional overlay line M_P + M_R = c."""
    state = job.style.get("state", "pi_HH")
    if state not in SWEEP_MASS_COLUMNS:
        raise SchemaError(f"unknown state column {state!r}")
    frame = _load(job.inputs[0], HEATMAP_KEY_COLUMNS + (state,))
    betas = sorted(frame["beta"].unique())
    fig, axes = plt.subplots(
        1, len(betas), figsize=(3.4 * len(betas), 3.2), squeeze=False,
    )
    overlay = job.style.get("overlay_sum")
    for j, beta in enumerate(betas):
        ax = axes[0][j]
        panel = frame[frame["beta"] == beta]
        grid = panel.pivot_table(
            index="M_R", columns="M_P", values=state, aggfunc="first",
        )
        if grid.isna().any().any():
            holes = [
                (int(m_p), int(m_r))
                for m_r in grid.index for m_p in grid.columns
                if pd.isna(grid.at[m_r, m_p])
            ]
            raise SchemaError(
                f"beta={beta:g}: missing grid cells (M_P, M_R) = {holes}"
            )
        mesh = ax.pcolormesh(
            grid.columns, grid.index, grid.values,
            cmap=job.style.get("cmap", "viridis"), vmin=0.0, vmax=1.0,
            shading="nearest",
        )
        if overlay is not None:
            lo, hi = float(grid.columns.min()), float(grid.columns.max())
            ax.plot([lo, overlay - lo], [overlay - lo, lo],
                    color="white", linewidth=1.5)
            ax.set_xlim(lo, hi)
            ax.set_ylim(float(grid.index.min()), float(grid.index.max()))
        ax.set_title(f"{state}, beta={beta:g}", fontsize=9)
        ax.set_xlabel("M_P")
        if j == 0:
            ax.set_ylabel("M_R")
    fig.colorbar(mesh, ax=axes[0][-1])
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.style.get("dpi", 150))
    plt.close(fig)
    return job.output


def top_bin_fractions(frame: pd.DataFrame, bins: int) -> dict[str, float]:
    """Fraction of rows whose mass falls in the highest of `bins` equal
    bins of [0, 1], per state column. Pure counting."""
    cutoff = (bins - 1) / bins
    n = len(frame)
    return {
        state: float((frame[state] >= cutoff).sum()) / n
        for state in SWEEP_MASS_COLUMNS
    }


def plot_histogram(job: FigureJob) -> Path:
    """Per-state histograms of stationary masses binned in [0, 1]; prints
    the top-bin fraction for each state."""
    frame = _load(job.inputs[0], SWEEP_MASS_COLUMNS)
    bins = int(job.style.get("bins", 100))
    if bins < 1:
        raise SchemaError("bins must be >= 1")
    fig, axes = plt.subplots(1, 4, figsize=(13, 3.0), sharey=True)
    edges = [i / bins for i in range(bins + 1)]
    for ax, state in zip(axes, SWEEP_MASS_COLUMNS):
        ax.hist(frame[state], bins=edges, color="tab:blue",
                weights=[1.0 / len(frame)] * len(frame))
        ax.set_xlabel(state)
        ax.set_xlim(0, 1)
    axes[0].set_ylabel("fraction of grid points")
    fig.tight_layout()
    fig.savefig(job.output, dpi=job.style.get("dpi", 150))
    plt.close(fig)
    for state, fraction in top_bin_fractions(frame, bins).items():
        print(f"top_bin {state} {fraction:.6f}")
    return job.output


RENDERERS = {
    "lines": plot_lines,
    "heatmap": plot_heatmap,
    "histogram": plot_histogram,
}

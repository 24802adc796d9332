"""PNG renderings of reproduced tables and density figures."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .tables import FigureReproduction, Reproduction  # noqa: E402

__all__ = ["plot_reproduction", "plot_table", "plot_figure"]


def plot_table(rep: Reproduction, path: str | Path) -> Path:
    """One panel per row: reproduced rates against published ones, column by column."""
    rate_cols = [i for i, c in enumerate(rep.columns) if c != "k_opt"]
    labels = list(rep.rows)
    ncols = min(4, len(labels)) if len(labels) <= 12 else 1
    if ncols == 1:
        # many rows (power tables): one panel per column across the alternatives
        fig, axes = plt.subplots(1, 1, figsize=(10, 4.5))
        x = range(len(labels))
        for i in rate_cols:
            line, = axes.plot(x, [rep.rows[r][i] for r in labels], marker="o", ms=3,
                              label=rep.columns[i])
            axes.plot(x, [rep.published[r][i] for r in labels], ls="--", color=line.get_color(), lw=0.8)
        axes.set_xticks(list(x))
        axes.set_xticklabels(labels, rotation=90, fontsize=7)
        axes.set_ylabel("rejection rate")
        axes.legend(fontsize=7, ncol=2)
        axes.set_title(f"{rep.name}: reproduced (solid) vs published (dashed)", fontsize=9)
    else:
        nrows = math.ceil(len(labels) / ncols)
        fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 2.8 * nrows), squeeze=False)
        for ax, label in zip(axes.flat, labels):
            x = range(len(rate_cols))
            ax.plot(x, [rep.rows[label][i] for i in rate_cols], marker="o", label="reproduced")
            ax.plot(x, [rep.published[label][i] for i in rate_cols], marker="s", ls="--", label="published")
            ax.axhline(0.05, color="grey", lw=0.6)
            ax.set_xticks(list(x))
            ax.set_xticklabels([rep.columns[i] for i in rate_cols], rotation=60, fontsize=6)
            ax.set_title(label, fontsize=8)
        for ax in list(axes.flat)[len(labels):]:
            ax.axis("off")
        axes.flat[0].legend(fontsize=6)
        fig.suptitle(rep.title, fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_figure(rep: FigureReproduction, path: str | Path) -> Path:
    """Estimated densities with the N(0, 1) reference, one panel per statistic family."""
    families = list(dict.fromkeys(c.statistic for c in rep.curves))
    fig, axes = plt.subplots(len(families), 1, figsize=(6, 3.2 * len(families)), squeeze=False)
    for ax, fam in zip(axes[:, 0], families):
        curves = [c for c in rep.curves if c.statistic == fam]
        for c in curves:
            ax.plot(c.x, c.density, lw=1.2, label=f"{fam}({c.parameter})")
        ref = curves[0]
        ax.plot(ref.x, ref.reference, color="black", ls="-.", lw=0.9, label="N(0,1)")
        ax.set_xlim(-4, 5)
        ax.legend(fontsize=7)
    fig.suptitle(rep.title, fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_reproduction(rep, path: str | Path) -> Path:
    if isinstance(rep, FigureReproduction):
        return plot_figure(rep, path)
    return plot_table(rep, path)

"""Figure rendering for sweep reports and the two-arc demo.

Uses the object-oriented matplotlib API throughout so no global backend
state is touched; figures go straight to files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .harness import DemoResult, ResultRow
from .inno import PROV_INNO, PROV_SEED

ARM_STYLES = {
    "gfhf": dict(color="#777777", marker="o", linestyle="--"),
    "lgc": dict(color="#bbbbbb", marker="s", linestyle="--"),
    "inno+gfhf": dict(color="#d62728", marker="o", linestyle="-"),
    "inno+lgc": dict(color="#1f77b4", marker="s", linestyle="-"),
    "gfhf+cmn": dict(color="#2ca02c", marker="^", linestyle=":"),
}

CLASS_COLORS = ("#d62728", "#1f77b4")
CLASS_MARKERS = ("s", "v")


def _save(fig: Figure, path: str | Path) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=150, bbox_inches="tight")


def save_sweep_figure(
    rows: Sequence[ResultRow], path: str | Path, x_label: str, title: str
) -> None:
    """Mean accuracy per arm against the sweep value, std as error bars."""
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.add_subplot(111)
    arms = []
    for row in rows:
        if row.arm not in arms:
            arms.append(row.arm)
    for arm in arms:
        arm_rows = [r for r in rows if r.arm == arm]
        x = [r.sweep_value for r in arm_rows]
        y = [r.mean_accuracy for r in arm_rows]
        err = [r.std_accuracy for r in arm_rows]
        style = ARM_STYLES.get(arm, dict(marker="x"))
        ax.errorbar(
            x, y, yerr=err, label=arm, capsize=2.5,
            markersize=4.5, linewidth=1.3, **style,
        )
    ax.set_xlabel(x_label)
    ax.set_ylabel("mean accuracy")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    _save(fig, path)


def save_demo_figure(demo: DemoResult, path: str | Path) -> None:
    """Ground truth plus one prediction panel per arm for the arcs demo.

    Seed labels are drawn as large filled markers with black edges, points
    promoted during balancing as stars, everything else colored by class.
    """
    panels = 1 + len(demo.outcomes)
    cols = min(3, panels)
    rows_ = int(np.ceil(panels / cols))
    fig = Figure(figsize=(4.1 * cols, 3.6 * rows_))
    axes = fig.subplots(rows_, cols, squeeze=False).ravel()

    features = demo.dataset.features
    truth = demo.dataset.labels

    def scatter_classes(ax, assignment):
        for j in range(demo.dataset.class_count):
            members = assignment == j
            ax.scatter(
                features[members, 0], features[members, 1],
                s=14, c=CLASS_COLORS[j % len(CLASS_COLORS)],
                marker=CLASS_MARKERS[j % len(CLASS_MARKERS)],
                alpha=0.55, linewidths=0,
            )

    scatter_classes(axes[0], truth)
    axes[0].set_title("ground truth")

    for ax, outcome in zip(axes[1:], demo.outcomes):
        scatter_classes(ax, outcome.predictions)
        seeds = outcome.state.provenance == PROV_SEED
        added = outcome.state.provenance == PROV_INNO
        ax.scatter(
            features[seeds, 0], features[seeds, 1],
            s=70, c=[CLASS_COLORS[j] for j in outcome.state.assignment[seeds]],
            marker="o", edgecolors="black", linewidths=1.2, zorder=3,
        )
        if added.any():
            ax.scatter(
                features[added, 0], features[added, 1],
                s=85, c=[CLASS_COLORS[j] for j in outcome.state.assignment[added]],
                marker="*", edgecolors="black", linewidths=0.8, zorder=3,
            )
        arm = ("inno+" if outcome.use_inno else "") + outcome.method
        ax.set_title(f"{arm}  acc={outcome.accuracy:.3f}")

    for ax in axes:
        ax.set_aspect("equal")
        ax.grid(True, alpha=0.25)
    for ax in axes[panels:]:
        ax.set_visible(False)
    fig.tight_layout()
    _save(fig, path)

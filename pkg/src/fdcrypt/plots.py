"""Matplotlib figures for run reports."""

from __future__ import annotations

import math

import matplotlib as mpl
import matplotlib.pyplot as plt
import numpy as np

STAGE_LABELS = {"fakes": "fake ECs", "scaling": "scaling", "conflicts": "conflicts",
                "fp": "FP pairs"}
COLORS = ["#4477aa", "#66ccee", "#228833", "#ccbb44", "#ee6677", "#aa3377"]


def _style(width: float = 7.0, height: float | None = None):
    mpl.rcParams.update({
        "font.size": 10,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "axes.grid": True,
        "grid.alpha": 0.3,
    })
    golden = (math.sqrt(5) - 1.0) / 2.0
    return plt.subplots(figsize=(width, height or width * golden))


def plot_overhead(reports):
    """Stacked per-stage space overhead (added rows / original rows) per run."""
    fig, ax = _style()
    labels = [label for label, _ in reports]
    x = np.arange(len(reports))
    bottom = np.zeros(len(reports))
    for color, (stage, name) in zip(COLORS, STAGE_LABELS.items()):
        vals = np.array([100 * r.overhead[stage] for _, r in reports])
        ax.bar(x, vals, bottom=bottom, color=color, label=name, width=0.6)
        bottom += vals
    ax.set_xticks(x, labels, rotation=30, ha="right")
    ax.set_ylabel("space overhead (%)")
    ax.legend(frameon=False, fontsize=8)
    return fig


def plot_timings(reports):
    fig, ax = _style()
    stages = sorted({s for _, r in reports for s in r.timings})
    x = np.arange(len(reports))
    width = 0.8 / max(len(stages), 1)
    for i, stage in enumerate(stages):
        vals = [r.timings.get(stage, 0.0) for _, r in reports]
        ax.bar(x + i * width, vals, width=width, color=COLORS[i % len(COLORS)], label=stage)
    ax.set_xticks(x + 0.4 - width / 2, [label for label, _ in reports], rotation=30, ha="right")
    ax.set_ylabel("seconds")
    ax.legend(frameon=False, fontsize=8)
    return fig


def plot_attack_rates(rows):
    """Empirical attack success with the alpha + 3 sigma line per row."""
    fig, ax = _style()
    x = np.arange(len(rows))
    rates = [r["rate"] for r in rows]
    limits = [r["limit"] for r in rows]
    ax.bar(x, rates, color=[COLORS[0] if r["rate"] <= r["limit"] else COLORS[4] for r in rows],
           width=0.6)
    ax.scatter(x, limits, marker="_", s=400, color="black", label="alpha + 3 sigma")
    ax.set_xticks(x, [f"{r['scheme']}/{r['attack']}" for r in rows], rotation=30, ha="right")
    ax.set_ylabel("success rate")
    ax.set_ylim(0, 1.05)
    ax.legend(frameon=False, fontsize=8)
    return fig

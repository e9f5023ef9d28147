"""Matplotlib figures written next to the experiment CSVs.

The CSV is the contract artefact; figures are a convenience.  SVG output is
made byte-stable by fixing the hash salt and dropping the date metadata.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "cascadenet",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "lines.linewidth": 1.5,
    "figure.figsize": (5.5, 3.6),
}


def _save(fig, path):
    path = Path(path)
    fmt = path.suffix.lstrip(".") or "svg"
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, metadata=metadata, bbox_inches="tight")
    plt.close(fig)


def plot_attack_curves(series: dict, path, title: str = "", show_injury: bool = True):
    """Infection fraction vs attack size, one line per model.

    ``series`` maps a model label to its list of curve rows.  Injury
    fractions are drawn dashed when ``show_injury`` is set.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, rows in series.items():
            ks = [r.k for r in rows]
            line, = ax.plot(ks, [r.infection_fraction for r in rows], label=f"{label} infection")
            if show_injury:
                ax.plot(ks, [r.injury_fraction for r in rows], linestyle="--", color=line.get_color(),
                        label=f"{label} injury")
        ax.set_xlabel("number of attacked nodes k")
        ax.set_ylabel("fraction of nodes")
        ax.set_ylim(0, 1)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def plot_degree_ccdf(series: dict, path, title: str = ""):
    """Log-log degree CCDF per model; ``series`` maps label -> degree histogram."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, hist in series.items():
            hist = np.asarray(hist, dtype=float)
            tail = np.cumsum(hist[::-1])[::-1] / hist.sum()
            ks = np.flatnonzero(hist)
            ks = ks[ks > 0]
            ax.loglog(ks, tail[ks], marker=".", linestyle="none", label=label)
        ax.set_xlabel("degree k")
        ax.set_ylabel("P(degree >= k)")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def plot_conductance(series: dict, path, title: str = ""):
    """Sorted community conductances per model."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, phis in series.items():
            phis = np.sort(np.asarray(phis))
            ax.plot(np.arange(1, phis.size + 1) / max(phis.size, 1), phis, label=label)
        ax.set_xlabel("community rank (fraction)")
        ax.set_ylabel("conductance")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def plot_random_sets(series: dict, path, title: str = ""):
    """Histogram of infection fractions over random initial sets."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, sizes in series.items():
            ax.hist(np.asarray(sizes, dtype=float), bins=20, alpha=0.7, label=label)
        ax.set_xlabel("infected nodes")
        ax.set_ylabel("trials")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def render_experiment(result, path):
    spec = result.spec
    if spec.task == "attack_curve":
        plot_attack_curves(result.series, path, spec.name, show_injury=len(result.series) == 1)
    elif spec.task == "degree_distribution":
        plot_degree_ccdf(result.series, path, spec.name)
    elif spec.task == "conductance":
        plot_conductance(result.series, path, spec.name)
    else:
        plot_random_sets(result.series, path, spec.name)

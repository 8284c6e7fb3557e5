"""Figure rendering for the report CSV data.

Every renderer writes a PNG next to the corresponding delimited output.  The
files carry no version or timestamp metadata, so reruns with identical inputs
are byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .similarity import HistogramEstimate
from .stats import RankingReport

_FIGSIZE = (6.4, 4.0)
_DPI = 130
_PNG_METADATA = {"Software": None}


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)


def save_similarity_histogram(
    estimate: HistogramEstimate,
    path: str | Path,
    analytic_density: np.ndarray | None = None,
    title: str = "similarity distribution",
) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    width = 1.0 / estimate.n_bins
    ax.bar(
        estimate.bin_low,
        estimate.density,
        width=width,
        align="edge",
        color="#4878cf",
        edgecolor="white",
        label="empirical",
    )
    if analytic_density is not None:
        edges = np.append(estimate.bin_low, 1.0)
        ax.stairs(analytic_density, edges, color="#d65f5f", linewidth=1.8, label="analytic")
    ax.set_xlabel("similarity s")
    ax.set_ylabel("density")
    ax.set_xlim(0.0, 1.0)
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def save_convergence(
    curves: dict[str, list[tuple[np.ndarray, np.ndarray]]],
    path: str | Path,
    title: str = "convergence",
) -> None:
    """Median best-so-far (noise-free) versus evaluations, one line per algorithm.

    ``curves`` maps algorithm name to a list of (evals, best) run histories.
    """
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    for name, runs in curves.items():
        length = min(len(evals) for evals, _ in runs)
        evals = runs[0][0][:length]
        stacked = np.vstack([best[:length] for _, best in runs])
        ax.plot(evals, np.median(stacked, axis=0), label=name, linewidth=1.6)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("median best objective")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend(frameon=False, ncol=3, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def save_ranking(report: RankingReport, path: str | Path, title: str = "ranking") -> None:
    """Algorithms by rank with shaded statistical-tie groups."""
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    x = np.arange(len(report.order))
    group_ids = np.asarray(report.group_ids)
    shades = ["#d9e4f5", "#f5e1d9", "#ddf0dd", "#f0ddee", "#f7f1cf", "#d9f0f0"]
    for gid in range(group_ids.max() + 1):
        members = x[group_ids == gid]
        ax.axvspan(members.min() - 0.5, members.max() + 0.5, color=shades[gid % len(shades)])
    ax.plot(x, report.medians, "o-", color="#333333", linewidth=1.4)
    ax.set_xticks(x)
    ax.set_xticklabels(report.order)
    ax.set_xlim(-0.5, len(x) - 0.5)
    ax.set_ylabel("median final objective")
    if min(report.medians) > 0:
        ax.set_yscale("log")
    ax.set_title(f"{title} (alpha={report.alpha})")
    fig.tight_layout()
    _save(fig, path)


def save_toy_mapping(
    features: np.ndarray,
    optima: np.ndarray,
    path: str | Path,
    title: str = "task-optimum mapping",
) -> None:
    fig, (left, right) = plt.subplots(1, 2, figsize=(8.0, 4.0), dpi=_DPI)
    left.scatter(features[:, 0], features[:, 1], s=4, color="#4878cf", alpha=0.5)
    left.set_xlabel("station 1 location")
    left.set_ylabel("station 2 location")
    left.set_title("task features")
    right.scatter(optima[:, 0], optima[:, 1], s=4, color="#d65f5f", alpha=0.5)
    right.set_xlabel("radius 1")
    right.set_ylabel("radius 2")
    right.set_title("optima")
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def save_coverage(gammas: dict[str, float], path: str | Path, title: str = "optimum coverage") -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    names = list(gammas)
    ax.bar(names, [gammas[n] for n in names], color="#4878cf")
    ax.set_ylabel("coverage")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)

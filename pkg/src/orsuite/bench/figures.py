"""Figure rendering for benchmark reports and training curves.

Uses the non-interactive backend so the CLI can render on headless machines;
figures land next to the delimited report files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import BenchmarkReport


def save_benchmark_figure(report: BenchmarkReport, path: str | Path) -> Path:
    """Bar chart of method means with std error bars; ratios annotated."""
    path = Path(path)
    methods = [r.method for r in report.results]
    means = [r.mean for r in report.results]
    stds = [r.std for r in report.results]
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(methods), 4.0))
    bars = ax.bar(methods, means, yerr=stds, capsize=4, color="#4878a8")
    bars[0].set_color("#2a4d69")  # reference method stands out
    for bar, r in zip(bars, report.results):
        ax.annotate(
            f"ratio {r.ratio:.3g}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom" if bar.get_height() >= 0 else "top",
            fontsize=8,
        )
    ax.set_ylabel("mean episode reward")
    ax.set_title(f"{report.env_id}: {report.episodes} episodes, seed {report.seed}")
    ax.axhline(0.0, color="black", linewidth=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_curve_figure(curve, path: str | Path, title: str = "training curve") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(len(curve)), curve, marker="o", markersize=3, color="#4878a8")
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean episode reward")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

"""Matplotlib figures for sweep curves and 2-D cluster maps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .measure import UNASSIGNED, ClusterResult
from .sweep import SweepCurve


def plot_sweep(curve: SweepCurve, n_total: int, path: str | Path) -> None:
    """Line chart of N(delta) with the selected threshold marked in red.

    When the sweep annotations carry ari/nmi values they appear as paired
    bars on a secondary axis.
    """
    fig, ax = plt.subplots(figsize=(7, 4))
    have_metrics = any("ari" in note for note in curve.annotations)
    if have_metrics:
        ax2 = ax.twinx()
        width = min(np.diff(curve.grid)) * 0.4 if len(curve.grid) > 1 else 0.8
        aris = [note.get("ari", 0.0) for note in curve.annotations]
        nmis = [note.get("nmi", 0.0) for note in curve.annotations]
        ax2.bar([g - width / 2 for g in curve.grid], aris, width=width,
                color="orange", alpha=0.6, label="ARI")
        ax2.bar([g + width / 2 for g in curve.grid], nmis, width=width,
                color="gray", alpha=0.6, label="NMI")
        ax2.set_ylim(0, 1.05)
        ax2.set_ylabel("score")
        ax2.legend(loc="lower right", fontsize=8)
    ax.plot(curve.grid, curve.n_assigned, "-o", color="tab:blue", ms=3,
            label="points in clusters", zorder=3)
    if curve.selected_delta is not None:
        idx = curve.grid.index(curve.selected_delta)
        ax.plot([curve.selected_delta], [curve.n_assigned[idx]], "o",
                color="red", ms=9, zorder=4)
    ax.axhline(n_total / 2.0, color="black", lw=0.6, ls=":")
    ax.set_xlabel("size threshold")
    ax.set_ylabel("points in clusters")
    ax.set_ylim(0, n_total * 1.05)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _to_2d(points: np.ndarray) -> tuple[np.ndarray, str]:
    if points.shape[1] == 2:
        return points, ""
    centered = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return centered @ vt[:2].T, " (PCA projection)"


def plot_assignments(points: np.ndarray, result: ClusterResult | np.ndarray,
                     path: str | Path, title: str | None = None) -> None:
    """Scatter of the clustering; unassigned points are small and gray."""
    assignment = result.assignment if isinstance(result, ClusterResult) else np.asarray(result)
    coords, suffix = _to_2d(np.asarray(points, dtype=np.float64))
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    gray = assignment == UNASSIGNED
    if gray.any():
        ax.scatter(coords[gray, 0], coords[gray, 1], s=6, c="0.75", label="unassigned")
    clusters = [c for c in np.unique(assignment) if c != UNASSIGNED]
    cmap = plt.get_cmap("tab10")
    for c in clusters:
        mask = assignment == c
        ax.scatter(coords[mask, 0], coords[mask, 1], s=8,
                   color=cmap(int(c) % 10), label=f"cluster {int(c)}")
    ax.set_aspect("equal")
    ax.set_title((title or "cluster map") + suffix, fontsize=10)
    if len(clusters) <= 10:
        ax.legend(fontsize=7, markerscale=1.5, loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

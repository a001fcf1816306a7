"""Figure rendering for CLI reports.

All functions write PNG files next to the delimited output and return
the path written.  Rendering uses the Agg backend so runs stay headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PALETTE = ["#E63946", "#457B9D", "#2A9D8F", "#E9C46A", "#F4A261", "#6D6875"]


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_cluster_scatter(points, labels, centroids, path, weights=None, title=""):
    """Scatter of the first two feature axes, colored by hard label.

    Marker area tracks the point weight when weights are given;
    centroids are drawn as black stars.  One-dimensional data is plotted
    against the point index.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
    labels = np.asarray(labels)
    if points.shape[1] == 1:
        points = np.column_stack([np.arange(len(points)), points[:, 0]])
        centroids = np.column_stack([np.zeros(len(centroids)), centroids[:, 0]])

    fig, ax = plt.subplots(figsize=(7, 5))
    sizes = 18.0
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        sizes = 40.0 * weights / weights.max() + 6.0
    for k in np.unique(labels):
        mask = labels == k
        ax.scatter(
            points[mask, 0], points[mask, 1],
            s=sizes[mask] if np.ndim(sizes) else sizes,
            color=PALETTE[int(k) % len(PALETTE)], alpha=0.7,
            edgecolors="white", linewidths=0.3, label=f"cluster {k}",
        )
    ax.scatter(centroids[:, 0], centroids[:, 1], s=220, marker="*",
               c="black", zorder=5, label="centroids")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=9)
    return _finish(fig, path)


def save_objective_traces(traces, path, title="Objective per iteration"):
    """Line plot of one or more objective traces, log-scaled when spread is wide."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, (label, trace) in enumerate(traces.items()):
        ax.plot(trace, lw=2, marker="o", ms=3,
                color=PALETTE[i % len(PALETTE)], label=f"{label} ({len(trace)} iters)")
    values = [v for t in traces.values() for v in t]
    if values and min(values) > 0 and max(values) / min(values) > 50:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_title(title)
    ax.legend(fontsize=9)
    return _finish(fig, path)


def save_comparison_chart(reports, path):
    """Grouped bars of ARI and capacity residual for compared algorithms."""
    names = [r.algorithm for r in reports]
    aris = [r.ari if r.ari is not None else np.nan for r in reports]
    residuals = [
        r.capacity_residual if isinstance(r.capacity_residual, float) else np.nan
        for r in reports
    ]
    x = np.arange(len(names))
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4.5))
    left.bar(x, aris, color=PALETTE[: len(names)], alpha=0.85)
    left.set_xticks(x, names, rotation=15)
    left.set_ylabel("adjusted Rand index")
    left.set_ylim(-0.05, 1.05)
    left.axhline(0, color="black", lw=0.8)
    right.bar(x, residuals, color=PALETTE[: len(names)], alpha=0.85)
    right.set_xticks(x, names, rotation=15)
    right.set_ylabel("relative capacity residual")
    right.set_yscale("log")
    for ax in (left, right):
        ax.grid(axis="y", alpha=0.3)
    fig.suptitle("Algorithm comparison")
    return _finish(fig, path)


def figure_path(directory, stem):
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, f"{stem}.png")

"""Matplotlib figures written next to the delimited pipeline outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .network import CopulaNet, forward_with_derivs
from .raster import ChangeMap
from .training import LOSS_COLUMNS

plt.rcParams.update({
    "figure.figsize": (7.0, 4.3),
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
})


def save_loss_curves(history: np.ndarray, path: str | Path) -> None:
    """Per-component loss trajectories on a log scale."""
    fig, ax = plt.subplots()
    epochs = np.arange(len(history))
    for i, name in enumerate(LOSS_COLUMNS):
        lw = 1.6 if name == "total" else 0.9
        ax.plot(epochs, np.maximum(history[:, i], 1e-12), label=name, linewidth=lw)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(ncol=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_copula_surface(
    density_fn, path: str | Path, cdf_fn=None, n: int = 101
) -> None:
    """Heatmaps of a fitted density (and optionally CDF) on the unit square.

    ``density_fn(u, v)`` and ``cdf_fn(u, v)`` take flat arrays.
    """
    t = np.linspace(0.005, 0.995, n)
    uu, vv = np.meshgrid(t, t, indexing="ij")
    dens = np.asarray(density_fn(uu.ravel(), vv.ravel())).reshape(n, n)
    panels = [("density", dens)]
    if cdf_fn is not None:
        panels.append(("CDF", np.asarray(cdf_fn(uu.ravel(), vv.ravel())).reshape(n, n)))
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.8))
    axes = np.atleast_1d(axes)
    for ax, (title, grid) in zip(axes, panels):
        im = ax.imshow(
            grid.T, origin="lower", extent=(0, 1, 0, 1), aspect="equal", cmap="viridis"
        )
        ax.set_title(title)
        ax.set_xlabel("u")
        ax.set_ylabel("v")
        ax.grid(False)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_net_surface(net: CopulaNet, path: str | Path, rho: float) -> None:
    def dens(u, v):
        return forward_with_derivs(net, u, v, rho=rho).pdf

    def cdfv(u, v):
        return forward_with_derivs(net, u, v, rho=rho).c

    save_copula_surface(dens, path, cdf_fn=cdfv)


def save_score_figure(
    u: np.ndarray,
    v: np.ndarray,
    scores: np.ndarray,
    labels: np.ndarray,
    path: str | Path,
) -> None:
    """PIT scatter colored by decision, next to the score histogram."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.8))
    changed = labels.astype(bool)
    ax1.scatter(u[~changed], v[~changed], s=4, alpha=0.6, label="unchanged")
    ax1.scatter(u[changed], v[changed], s=4, alpha=0.6, color="crimson", label="changed")
    ax1.set_xlabel("u")
    ax1.set_ylabel("v")
    ax1.set_xlim(0, 1)
    ax1.set_ylim(0, 1)
    ax1.legend(fontsize=8)
    ax1.set_title("superpixel PIT pairs")
    bins = min(60, max(10, len(scores) // 8))
    ax2.hist(scores[~changed], bins=bins, alpha=0.7, label="unchanged")
    ax2.hist(scores[changed], bins=bins, alpha=0.7, color="crimson", label="changed")
    ax2.set_xlabel("-log10 density")
    ax2.set_ylabel("superpixels")
    ax2.legend(fontsize=8)
    ax2.set_title("score split")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_mask_figure(
    mask: ChangeMap, path: str | Path, truth: ChangeMap | None = None
) -> None:
    panels = [("detected changes", mask.labels)]
    if truth is not None:
        panels.append(("ground truth", truth.labels))
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.8))
    axes = np.atleast_1d(axes)
    for ax, (title, grid) in zip(axes, panels):
        ax.imshow(grid, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.grid(False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

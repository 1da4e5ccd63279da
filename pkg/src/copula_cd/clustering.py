"""Binary change decision from per-superpixel densities.

Densities pass through -log10 so weakly correlated (changed) superpixels
get large scores, then a two-class fuzzy c-means split assigns the
higher-center cluster to "changed".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import ChangeMap
from .segmentation import SuperpixelMap


@dataclass(frozen=True)
class FcmResult:
    """Soft two-class clustering of scores.

    memberships has shape (n, 2) and rows summing to one; labels is the
    hardened argmax with 1 = changed (the higher-center cluster);
    objective_history records sum(u^m d^2) after every iteration.
    """

    memberships: np.ndarray
    centers: np.ndarray
    labels: np.ndarray
    iterations: int
    objective_history: np.ndarray


def negative_log_scores(pdfs: np.ndarray) -> np.ndarray:
    """scores = -log10(pdf); requires strictly positive densities."""
    pdfs = np.asarray(pdfs, dtype=np.float64)
    if np.any(pdfs <= 0):
        raise ValueError("densities must be strictly positive")
    return -np.log10(pdfs)


def fcm_two_class(
    scores: np.ndarray,
    fuzzifier: float = 2.0,
    tol: float = 1e-6,
    max_iter: int = 300,
    seed: int = 0,
) -> FcmResult:
    """Two-cluster fuzzy c-means over scalar scores.

    Centers start at the 25th/75th percentiles (seeded jitter breaks
    exact ties); membership and center updates alternate until the center
    shift drops below ``tol``. The cluster with the higher center is
    labeled changed.

    Raises ValueError when all scores are identical.
    """
    x = np.asarray(scores, dtype=np.float64)
    if len(x) < 2 or x.min() == x.max():
        raise ValueError("degenerate scores: need at least two distinct values")
    spread = x.max() - x.min()
    centers = np.percentile(x, [25.0, 75.0])
    if centers[0] == centers[1]:
        rng = np.random.default_rng(seed)
        centers[0] -= rng.uniform(0.05, 0.15) * spread
        centers[1] += rng.uniform(0.05, 0.15) * spread

    expo = 2.0 / (fuzzifier - 1.0)
    objective = []
    memberships = None
    for iteration in range(1, max_iter + 1):
        d2 = (x[:, None] - centers[None, :]) ** 2
        exact = d2 == 0.0
        on_center = exact.any(axis=1)
        with np.errstate(divide="ignore"):
            inv = d2 ** (-expo / 2.0)
        memberships = inv / inv.sum(axis=1, keepdims=True)
        memberships[on_center] = exact[on_center].astype(np.float64)

        um = memberships**fuzzifier
        new_centers = (um * x[:, None]).sum(axis=0) / um.sum(axis=0)
        objective.append(float((um * (x[:, None] - new_centers[None, :]) ** 2).sum()))
        shift = np.max(np.abs(new_centers - centers))
        centers = new_centers
        if shift < tol:
            break

    order = np.argsort(centers)  # low center first: index 1 becomes "changed"
    centers = centers[order]
    memberships = memberships[:, order]
    labels = (memberships[:, 1] > memberships[:, 0]).astype(np.uint8)
    return FcmResult(
        memberships=memberships,
        centers=centers,
        labels=labels,
        iterations=iteration,
        objective_history=np.asarray(objective),
    )


def labels_to_mask(spmap: SuperpixelMap, labels: np.ndarray) -> ChangeMap:
    """Broadcast per-superpixel labels back to pixels."""
    labels = np.asarray(labels)
    if len(labels) != spmap.count:
        raise ValueError(
            f"expected {spmap.count} labels, got {len(labels)}"
        )
    grid = labels.astype(np.uint8)[spmap.label]
    return ChangeMap(width=spmap.width, height=spmap.height, labels=grid)

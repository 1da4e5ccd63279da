"""Marginal CDF estimation and the probability integral transform.

A Gaussian-kernel density estimate of each feature marginal is evaluated
once at every 8-bit intensity level and frozen into a 256-entry lookup
table; transforming a feature is then a single integer index. The
empirical joint CDF used as the observation target also lives here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .segmentation import FeatureSet

CDF_FLOOR = 1e-6
_TOP_ANCHOR = 1.0 - 1e-6

N_LEVELS = 256


@dataclass(frozen=True)
class CdfTable:
    """Marginal CDF values at intensity levels 0..255.

    Entries are monotone nondecreasing, floored at CDF_FLOOR so downstream
    logs stay finite, and the level-255 entry is anchored at >= 1 - 1e-6.
    """

    entries: np.ndarray
    bandwidth: float
    sample_count: int

    def __post_init__(self):
        if self.entries.shape != (N_LEVELS,):
            raise ValueError(f"expected {N_LEVELS} entries, got {self.entries.shape}")
        if np.any(np.diff(self.entries) < 0):
            raise ValueError("CDF table entries must be nondecreasing")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CdfTable)
            and np.array_equal(self.entries, other.entries)
            and self.bandwidth == other.bandwidth
            and self.sample_count == other.sample_count
        )


def silverman_bandwidth(samples: np.ndarray) -> float:
    """h = 1.06 * sigma * n^(-1/5) with the unbiased sample deviation."""
    n = len(samples)
    return 1.06 * float(np.std(samples, ddof=1)) * n ** (-0.2)


def kde_cdf(samples: np.ndarray, x: np.ndarray, bandwidth: float) -> np.ndarray:
    """Gaussian-kernel CDF estimate at points ``x``: mean of Phi((x - s)/h)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return norm.cdf((x[:, None] - samples[None, :]) / bandwidth).mean(axis=1)


def fit_kde_cdf(samples: FeatureSet | np.ndarray) -> CdfTable:
    """Freeze the KDE marginal CDF of integer features into a lookup table.

    Raises ValueError for fewer than two samples or zero sample variance.
    """
    values = samples.values if isinstance(samples, FeatureSet) else np.asarray(samples)
    values = values.astype(np.float64)
    if len(values) < 2:
        raise ValueError("need at least 2 samples to fit a marginal")
    if np.std(values, ddof=1) == 0:
        raise ValueError("degenerate marginal: zero sample variance")
    h = silverman_bandwidth(values)
    entries = kde_cdf(values, np.arange(N_LEVELS, dtype=np.float64), h)
    entries = np.clip(entries, CDF_FLOOR, 1.0)
    entries[N_LEVELS - 1] = max(entries[N_LEVELS - 1], _TOP_ANCHOR)
    return CdfTable(entries=entries, bandwidth=h, sample_count=len(values))


def pit(features: FeatureSet | np.ndarray, table: CdfTable) -> np.ndarray:
    """Table lookup of each integer feature: exact indexing, no interpolation."""
    values = features.values if isinstance(features, FeatureSet) else np.asarray(features)
    if len(values) and (values.min() < 0 or values.max() >= N_LEVELS):
        raise ValueError("features must lie in [0, 255]")
    return table.entries[values.astype(np.intp)]


def empirical_joint_cdf(
    g1: np.ndarray, g2: np.ndarray, x: float, y: float
) -> float:
    """Fraction of paired features with g1 <= x and g2 <= y."""
    g1 = np.asarray(g1)
    g2 = np.asarray(g2)
    if len(g1) != len(g2):
        raise ValueError("paired feature sets must have equal length")
    if len(g1) == 0:
        raise ValueError("empty feature sets")
    return float(np.mean((g1 <= x) & (g2 <= y)))


def empirical_joint_cdf_grid(
    g1: np.ndarray, g2: np.ndarray, xs: np.ndarray, ys: np.ndarray
) -> np.ndarray:
    """empirical_joint_cdf evaluated on the full xs-by-ys grid.

    Returns shape (len(xs), len(ys)); entry [i, j] counts pairs with
    g1 <= xs[i] and g2 <= ys[j].
    """
    g1 = np.asarray(g1)
    g2 = np.asarray(g2)
    if len(g1) != len(g2) or len(g1) == 0:
        raise ValueError("paired feature sets must be nonempty and equal length")
    a1 = (g1[None, :] <= np.asarray(xs)[:, None]).astype(np.float64)
    a2 = (g2[None, :] <= np.asarray(ys)[:, None]).astype(np.float64)
    return (a1 @ a2.T) / len(g1)

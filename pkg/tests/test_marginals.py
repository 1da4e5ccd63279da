import numpy as np
import pytest
from scipy import stats

from copula_cd.marginals import (
    CdfTable,
    empirical_joint_cdf,
    empirical_joint_cdf_grid,
    fit_kde_cdf,
    kde_cdf,
    pit,
    silverman_bandwidth,
)
from copula_cd.segmentation import FeatureSet


def test_entries_match_direct_kde_sum():
    rng = np.random.default_rng(0)
    samples = rng.integers(0, 256, 200).astype(float)
    table = fit_kde_cdf(samples)
    h = silverman_bandwidth(samples)
    direct = stats.norm.cdf(
        (np.arange(256)[:, None] - samples[None, :]) / h
    ).mean(axis=1)
    direct = np.clip(direct, 1e-6, 1.0)
    direct[255] = max(direct[255], 1.0 - 1e-6)
    np.testing.assert_allclose(table.entries, direct, rtol=1e-12)


def test_uniform_spread_samples_give_linearish_table():
    samples = np.arange(0, 256, 2)
    table = fit_kde_cdf(samples)
    assert abs(table.entries[127] - 0.5) < 0.05


def test_two_point_symmetry():
    table = fit_kde_cdf(np.array([0.0, 255.0]))
    assert abs(table.entries[0] - 0.25) < 0.05  # half-kernel mass plus far tail
    # symmetric around the midpoint on interior levels (the top level is
    # anchored at 1 - 1e-6, so k = 0 pairs with an adjusted entry)
    k = np.arange(1, 255)
    np.testing.assert_allclose(table.entries[k] + table.entries[255 - k], 1.0, atol=1e-6)


def test_monotone_for_random_samples():
    rng = np.random.default_rng(1)
    for _ in range(10):
        table = fit_kde_cdf(rng.integers(0, 256, 50))
        assert np.all(np.diff(table.entries) >= 0)


def test_top_entry_anchor_and_floor():
    table = fit_kde_cdf(np.array([100, 110, 130, 200]))
    assert table.entries[255] >= 1 - 1e-6
    assert table.entries.min() >= 1e-6


def test_large_sample_accuracy_against_true_normal():
    rng = np.random.default_rng(2)
    raw = np.clip(np.round(rng.normal(128, 25, 3000)), 0, 255)
    table = fit_kde_cdf(raw)
    # integer-level quantization shifts the CDF by about half a level
    true = stats.norm.cdf((np.arange(256) + 0.5 - 128) / 25)
    assert np.abs(table.entries - np.clip(true, 1e-6, 1)).max() < 0.05


def test_degenerate_inputs_rejected():
    with pytest.raises(ValueError, match="at least 2"):
        fit_kde_cdf(np.array([7]))
    with pytest.raises(ValueError, match="zero sample variance"):
        fit_kde_cdf(np.full(10, 42))


def test_pit_is_exact_table_lookup():
    rng = np.random.default_rng(3)
    samples = rng.integers(20, 240, 80)
    table = fit_kde_cdf(samples)
    feats = FeatureSet(values=rng.integers(0, 256, 40), ids=np.arange(40))
    out = pit(feats, table)
    np.testing.assert_array_equal(out, table.entries[feats.values])


def test_pit_upper_bound_and_determinism():
    table = fit_kde_cdf(np.array([10, 50, 90, 250]))
    out = pit(np.array([255, 12, 12]), table)
    assert out[0] >= 1 - 1e-6
    assert out[1] == out[2]


def test_pit_preserves_feature_ordering():
    rng = np.random.default_rng(4)
    table = fit_kde_cdf(rng.integers(0, 256, 100))
    feats = np.sort(rng.integers(0, 256, 30))
    out = pit(feats, table)
    assert np.all(np.diff(out) >= 0)


def test_pit_range_check():
    table = fit_kde_cdf(np.array([1.0, 2.0, 200.0]))
    with pytest.raises(ValueError):
        pit(np.array([256]), table)


def test_table_validation():
    bad = np.linspace(1, 0, 256)
    with pytest.raises(ValueError, match="nondecreasing"):
        CdfTable(entries=bad, bandwidth=1.0, sample_count=3)


def test_empirical_joint_cdf_corners_and_hand_count():
    g1 = np.array([1, 2, 3])
    g2 = np.array([1, 2, 3])
    assert empirical_joint_cdf(g1, g2, 255, 255) == 1.0
    assert empirical_joint_cdf(g1, g2, -1, -1) == 0.0
    assert empirical_joint_cdf(g1, g2, 2, 2) == pytest.approx(2 / 3)


def test_empirical_joint_cdf_monotone():
    rng = np.random.default_rng(5)
    g1 = rng.integers(0, 256, 50)
    g2 = rng.integers(0, 256, 50)
    xs = np.arange(0, 256, 17)
    grid = empirical_joint_cdf_grid(g1, g2, xs, xs)
    assert np.all(np.diff(grid, axis=0) >= 0)
    assert np.all(np.diff(grid, axis=1) >= 0)


def test_empirical_joint_cdf_grid_matches_pointwise():
    rng = np.random.default_rng(6)
    g1 = rng.integers(0, 256, 30)
    g2 = rng.integers(0, 256, 30)
    xs = np.array([10, 100, 200])
    ys = np.array([50, 150])
    grid = empirical_joint_cdf_grid(g1, g2, xs, ys)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert grid[i, j] == empirical_joint_cdf(g1, g2, x, y)


def test_empirical_joint_cdf_empty_rejected():
    with pytest.raises(ValueError):
        empirical_joint_cdf(np.array([]), np.array([]), 1, 1)


def test_kde_cdf_points_match_table_levels():
    rng = np.random.default_rng(7)
    samples = rng.integers(0, 250, 60).astype(float)
    h = silverman_bandwidth(samples)
    vals = kde_cdf(samples, np.array([0.0, 128.0, 255.0]), h)
    table = fit_kde_cdf(samples)
    assert vals[1] == pytest.approx(table.entries[128], rel=1e-12)

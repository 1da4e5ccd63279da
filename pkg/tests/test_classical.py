import numpy as np
import pytest

from copula_cd import classical
from copula_cd.classical import cdf, clayton, fit, frank, gaussian, pdf, sample, student_t

ALL_FAMILIES = [
    gaussian(0.6),
    gaussian(-0.4),
    student_t(0.5, 4.0),
    clayton(1.0),
    clayton(3.0),
    frank(4.0),
    frank(-3.0),
]


def test_clayton_median_point_closed_form():
    assert cdf(clayton(1.0), 0.5, 0.5) == pytest.approx(1 / 3, abs=1e-12)


def test_gaussian_median_point_arcsin_identity():
    expected = 0.25 + np.arcsin(0.5) / (2 * np.pi)
    assert cdf(gaussian(0.5), 0.5, 0.5) == pytest.approx(expected, abs=1e-4)


def test_gaussian_zero_rho_is_independence():
    u = np.array([0.2, 0.5, 0.9])
    v = np.array([0.3, 0.7, 0.4])
    np.testing.assert_allclose(cdf(gaussian(0.0), u, v), u * v, atol=1e-14)
    np.testing.assert_allclose(pdf(gaussian(0.0), u, v), 1.0, atol=1e-14)


@pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f"{f.family}")
def test_boundary_identities_on_grid(fam):
    t = np.linspace(0.0, 1.0, 100)
    tol = 1e-6 if fam.family in ("gaussian", "student_t") else 1e-10
    np.testing.assert_allclose(cdf(fam, t, np.ones_like(t)), t, atol=tol)
    np.testing.assert_allclose(cdf(fam, np.ones_like(t), t), t, atol=tol)
    np.testing.assert_allclose(cdf(fam, t, np.zeros_like(t)), 0.0, atol=tol)
    np.testing.assert_allclose(cdf(fam, np.zeros_like(t), t), 0.0, atol=tol)


@pytest.mark.parametrize(
    "fam", [gaussian(0.6), clayton(1.5), frank(4.0), student_t(0.5, 4.0)],
    ids=lambda f: f"{f.family}",
)
def test_pdf_integrates_to_one(fam):
    n = 256
    t = (np.arange(n) + 0.5) / n  # midpoint rule avoids corner singularities
    uu, vv = np.meshgrid(t, t, indexing="ij")
    total = pdf(fam, uu.ravel(), vv.ravel()).sum() / n**2
    assert abs(total - 1.0) < 0.01


def test_frank_small_theta_limit_is_independence():
    u = np.array([0.3, 0.6, 0.8])
    v = np.array([0.2, 0.5, 0.95])
    np.testing.assert_allclose(pdf(frank(1e-6), u, v), 1.0, atol=1e-3)


@pytest.mark.parametrize(
    "fam,h", [(gaussian(0.6), 1e-4), (clayton(2.0), 1e-4), (frank(3.0), 1e-4),
              (student_t(0.4, 5.0), 1e-3)],
    ids=lambda x: f"{x.family}" if hasattr(x, "family") else "",
)
def test_pdf_matches_mixed_difference_of_cdf(fam, h):
    for u, v in [(0.3, 0.4), (0.5, 0.7), (0.65, 0.25)]:
        fd = (
            cdf(fam, u + h, v + h)
            - cdf(fam, u + h, v - h)
            - cdf(fam, u - h, v + h)
            + cdf(fam, u - h, v - h)
        ) / (4 * h * h)
        assert pdf(fam, u, v) == pytest.approx(fd, rel=1e-3)


@pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f"{f.family}")
def test_pdf_nonnegative(fam):
    rng = np.random.default_rng(0)
    u = rng.uniform(0.01, 0.99, 200)
    v = rng.uniform(0.01, 0.99, 200)
    assert np.all(pdf(fam, u, v) >= 0)


def test_pdf_rejects_boundary_points():
    with pytest.raises(ValueError):
        pdf(clayton(1.0), 0.0, 0.5)


def test_parameter_validation():
    with pytest.raises(ValueError):
        gaussian(1.0)
    with pytest.raises(ValueError):
        student_t(0.5, -1.0)
    with pytest.raises(ValueError):
        clayton(-2.0)
    with pytest.raises(ValueError):
        frank(0.0)
    with pytest.raises(ValueError):
        classical.CopulaFamily("gumbel")


def test_fit_independence_recovers_zero_rho():
    rng = np.random.default_rng(1)
    u = rng.uniform(size=3000)
    v = rng.uniform(size=3000)
    fam = fit("gaussian", u, v)
    assert abs(fam.rho) < 0.05


def test_fit_gaussian_sample_and_refit():
    rng = np.random.default_rng(2)
    uv = sample(gaussian(0.7), 3000, rng)
    fam = fit("gaussian", uv[:, 0], uv[:, 1])
    assert fam.rho == pytest.approx(0.7, abs=0.05)


def test_fit_clayton_round_trip():
    rng = np.random.default_rng(3)
    uv = sample(clayton(2.0), 4000, rng)
    fam = fit("clayton", uv[:, 0], uv[:, 1])
    assert fam.theta == pytest.approx(2.0, rel=0.2)


def test_fit_frank_round_trip_both_signs():
    rng = np.random.default_rng(4)
    for theta in (5.0, -5.0):
        uv = sample(frank(theta), 4000, rng)
        fam = fit("frank", uv[:, 0], uv[:, 1])
        assert fam.theta == pytest.approx(theta, rel=0.2)


def test_fit_student_t_round_trip():
    rng = np.random.default_rng(5)
    uv = sample(student_t(0.6, 5.0), 3000, rng)
    fam = fit("student_t", uv[:, 0], uv[:, 1])
    assert fam.rho == pytest.approx(0.6, abs=0.05)
    assert 2 <= fam.nu <= 30


def test_fit_comonotone_clayton_errors():
    x = np.linspace(0.01, 0.99, 100)
    with pytest.raises(ValueError, match="comonotone|degenerate"):
        fit("clayton", x, x)


def test_fit_clayton_negative_tau_errors():
    x = np.linspace(0.01, 0.99, 100)
    with pytest.raises(ValueError, match="positive dependence"):
        fit("clayton", x, x[::-1])


def test_sampled_tau_matches_theory():
    rng = np.random.default_rng(6)
    cases = [
        (gaussian(0.8), 2 / np.pi * np.arcsin(0.8)),
        (student_t(0.8, 4.0), 2 / np.pi * np.arcsin(0.8)),
        (clayton(2.0), 2.0 / 4.0),
        (frank(5.0), classical.frank_tau(5.0)),
    ]
    for fam, expected in cases:
        uv = sample(fam, 4000, rng)
        tau = classical.kendall_tau(uv[:, 0], uv[:, 1])
        assert tau == pytest.approx(expected, abs=0.04), fam.family


def test_sampling_determinism():
    a = sample(gaussian(0.5), 100, np.random.default_rng(7))
    b = sample(gaussian(0.5), 100, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)

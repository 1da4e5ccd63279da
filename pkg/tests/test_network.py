import numpy as np
import pytest

from copula_cd.losses import (
    LossWeights,
    combine_losses,
    loss_boundary,
    loss_integration,
    loss_ml,
    loss_nonneg,
    loss_observation,
    observation_targets,
)
from copula_cd.marginals import fit_kde_cdf
from copula_cd.network import (
    CopulaEval,
    CopulaNet,
    forward_with_derivs,
    init_net,
    flatten_params,
    with_params,
)


def _zero_net(sizes=(2, 6, 6, 1)):
    net = init_net(sizes, seed=0)
    for w in net.weights:
        w[:] = 0.0
    return net


def _independence_eval(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return CopulaEval(c=u * v, du=v, dv=u, duv=np.ones_like(u), pdf=np.ones_like(u))


def test_init_determinism_and_param_counts():
    a = init_net((2, 20, 20, 20, 20, 20, 1), seed=7)
    b = init_net((2, 20, 20, 20, 20, 20, 1), seed=7)
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)
    assert a.n_params == 1761
    assert init_net((2, 15, 15, 15, 15, 15, 1), seed=0).n_params == 1021
    assert init_net((2, 10, 10, 10, 10, 10, 1), seed=0).n_params == 481
    assert all(np.all(bb == 0) for bb in a.biases)


def test_eval_finite_at_center():
    ev = forward_with_derivs(init_net((2, 20, 20, 1), seed=0), 0.5, 0.5)
    assert np.isfinite([ev.c, ev.du, ev.dv, ev.duv, ev.pdf]).all()


def test_zero_net_constant_output():
    ev = forward_with_derivs(_zero_net(), np.array([0.1, 0.9]), np.array([0.3, 0.6]))
    np.testing.assert_allclose(ev.c, 0.5)  # sigmoid(0)
    np.testing.assert_array_equal(ev.duv, 0.0)
    np.testing.assert_array_equal(ev.pdf, 1e-9)


def test_identity_passthrough_has_zero_mixed_partial():
    net = CopulaNet(
        layer_sizes=(2, 1),
        weights=[np.array([[0.7, -0.2]])],
        biases=[np.zeros(1)],
        hidden_activation="identity",
        output_activation="identity",
    )
    ev = forward_with_derivs(net, 0.3, 0.8)
    assert ev.duv == 0.0
    assert ev.du == 0.7 and ev.dv == -0.2


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(0)
    h = 1e-4
    for _ in range(40):
        width = int(rng.integers(3, 16))
        depth = int(rng.integers(1, 5))
        net = init_net([2] + [width] * depth + [1], seed=int(rng.integers(1e6)))
        u, v = rng.uniform(0.1, 0.9, 2)
        ev = forward_with_derivs(net, u, v)

        def c(uu, vv):
            return forward_with_derivs(net, uu, vv).c

        fd_du = (c(u + h, v) - c(u - h, v)) / (2 * h)
        fd_dv = (c(u, v + h) - c(u, v - h)) / (2 * h)
        fd_duv = (
            c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)
        ) / (4 * h * h)
        assert ev.du == pytest.approx(fd_du, rel=1e-3)
        assert ev.dv == pytest.approx(fd_dv, rel=1e-3)
        assert ev.duv == pytest.approx(fd_duv, rel=1e-3)


def test_pdf_clamp_invariant():
    rng = np.random.default_rng(1)
    for seed in range(5):
        net = init_net((2, 10, 10, 1), seed=seed)
        u = rng.uniform(0, 1, 200)
        v = rng.uniform(0, 1, 200)
        ev = forward_with_derivs(net, u, v)
        assert np.all(ev.pdf >= 1e-9)
        np.testing.assert_array_equal(ev.pdf, np.maximum(ev.duv, 0.0) + 1e-9)


def test_forward_rejects_mismatched_shapes():
    net = init_net((2, 4, 1), seed=0)
    with pytest.raises(ValueError):
        forward_with_derivs(net, np.zeros(3), np.zeros(4))


def test_boundary_loss_ideal_copula_is_zero():
    assert loss_boundary(_independence_eval, 50) == pytest.approx(0.0, abs=1e-14)


def test_boundary_loss_constant_net_closed_form():
    n = 64
    net = _zero_net()
    u = np.linspace(0, 1, n)
    expected = 2 * n * 0.5 + 2 * np.sum(np.abs(0.5 - u))
    assert loss_boundary(net, n) == pytest.approx(expected, rel=1e-12)


def test_integration_loss_unit_density():
    assert loss_integration(_independence_eval, 256) < 0.01


def test_integration_loss_double_density():
    def double(u, v):
        ones = np.ones_like(np.asarray(u, dtype=float))
        return CopulaEval(c=ones, du=ones, dv=ones, duv=2 * ones, pdf=2 * ones)

    n = 256
    expected = abs(1 - 2 * n**2 / (n - 1) ** 2)
    assert loss_integration(double, n) == pytest.approx(expected, abs=1e-6)


def test_nonneg_loss_cases():
    assert loss_nonneg(_independence_eval, 64) == 0.0

    def negative(u, v):
        m = -np.ones_like(np.asarray(u, dtype=float))
        return CopulaEval(c=-m, du=-m, dv=-m, duv=m, pdf=np.full_like(m, 1e-9))

    assert loss_nonneg(negative, 64) == pytest.approx(1.0, rel=1e-12)


def test_ml_loss_hand_cases():
    rng = np.random.default_rng(2)
    u = rng.uniform(0.1, 0.9, 100)
    v = rng.uniform(0.1, 0.9, 100)
    # density one everywhere: |eta - 0| / 100
    assert loss_ml(_independence_eval, u, v, eta=10.0) == pytest.approx(0.1, abs=1e-6)

    def floor_density(uu, vv):
        z = np.zeros_like(np.asarray(uu, dtype=float))
        return CopulaEval(c=z, du=z, dv=z, duv=z - 5.0, pdf=z + 1e-9)

    got = loss_ml(floor_density, u[:1], v[:1], eta=10.0, rho=1e-9)
    assert got == pytest.approx(abs(10.0 - np.log(1e-9)), rel=1e-9)  # ~30.72


def test_observation_loss_exact_match_is_zero():
    rng = np.random.default_rng(3)
    g1 = rng.integers(10, 240, 50)
    g2 = rng.integers(10, 240, 50)
    t1 = fit_kde_cdf(g1)
    t2 = fit_kde_cdf(g2)
    _, _, target = observation_targets(g1, g2, t1, t2, 20)

    def perfect(u, v):
        return CopulaEval(c=target, du=target, dv=target, duv=target, pdf=target)

    assert loss_observation(perfect, g1, g2, t1, t2, 20) == 0.0


def test_observation_loss_constant_zero_against_origin_mass():
    g1 = np.zeros(5, dtype=int)
    g2 = np.zeros(5, dtype=int)
    t1 = fit_kde_cdf(np.array([10, 60, 200]))
    t2 = fit_kde_cdf(np.array([30, 90, 210]))

    def zero(u, v):
        z = np.zeros_like(np.asarray(u, dtype=float))
        return CopulaEval(c=z, du=z, dv=z, duv=z, pdf=z + 1e-9)

    n = 25
    assert loss_observation(zero, g1, g2, t1, t2, n) == pytest.approx(n**2)


def test_combine_losses():
    assert combine_losses((1, 2, 3, 4, 5), LossWeights(1, 1, 1, 1, 1)) == 15
    assert combine_losses((9, 9, 9, 9, 9), LossWeights(0, 0, 0, 0, 0)) == 0
    default = LossWeights()
    assert default.as_tuple() == (2.0, 0.3, 1.0, 0.1, 5.0)
    with pytest.raises(ValueError):
        LossWeights(boundary=-1)


def test_flatten_round_trip():
    net = init_net((2, 8, 5, 1), seed=4)
    flat = flatten_params(net)
    back = with_params(net, flat)
    for w1, w2 in zip(net.weights, back.weights):
        np.testing.assert_array_equal(w1, w2)
    with pytest.raises(ValueError):
        with_params(net, flat[:-1])


def test_net_shape_validation():
    with pytest.raises(ValueError, match="2 inputs"):
        init_net((3, 4, 1), seed=0)
    with pytest.raises(ValueError, match="activation"):
        init_net((2, 4, 1), seed=0, hidden_activation="relu")

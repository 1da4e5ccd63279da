"""Full-batch training of the copula network under the five constraint
losses.

One epoch evaluates every constraint point exactly once: points that only
need CDF values (boundary and observation grids) go through the cheap
value-only pass, while points that need the mixed derivative (quadrature
grids and the data pairs) go through the tuple pass. When the integration
and non-negativity grids have the same resolution they share a single
evaluation. Gradients come from the matching reverse passes; the
optimizer is Adam with a Nesterov-style lookahead on the first moment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .losses import (
    LossWeights,
    TrainingData,
    boundary_points,
    observation_targets,
    unit_grid,
)
from .marginals import CdfTable
from .network import (
    CopulaNet,
    TupleWork,
    ValueWork,
    _backward_tuple,
    _backward_values,
    _forward_tuple,
    _forward_values,
    flatten_params,
    with_params,
)
from .segmentation import FeatureSet

LOSS_COLUMNS = ("boundary", "integration", "nonneg", "ml", "observation", "total")

_BETA1 = 0.9
_BETA2 = 0.999
_EPS = 1e-8


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss; carries the failing epoch."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite training loss at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings and constraint-grid resolutions."""

    learning_rate: float = 0.001
    epochs: int = 25000
    seed: int = 0
    n3: int = 400
    n4: int = 256
    n5: int = 256
    n6: int = 100
    eta: float = 10.0
    rho: float = 1e-9
    weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self):
        if min(self.n3, self.n4, self.n5, self.n6) < 2:
            raise ValueError("grid resolutions must be at least 2")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")


class _Prepared:
    """Constraint points, targets, workspaces, and batch layout, all fixed
    for a whole run."""

    def __init__(self, data: TrainingData, config: TrainConfig, layer_sizes):
        self.config = config
        u_bnd, v_bnd, self.bnd_target = boundary_points(config.n3)
        u_obs, v_obs, self.obs_target = observation_targets(
            data.g1, data.g2, data.table1, data.table2, config.n6
        )
        self.n_bnd = len(u_bnd)
        values_u = np.concatenate([u_bnd, u_obs])
        values_v = np.concatenate([v_bnd, v_obs])

        gu, gv = unit_grid(config.n4)
        self.n_grid = len(gu)
        self.shared_grid = config.n5 == config.n4
        if self.shared_grid:
            nu, nv = np.empty(0), np.empty(0)
        else:
            nu, nv = unit_grid(config.n5)
        self.n_nonneg = len(nu)
        self.u_data = data.table1.entries[data.g1.values]
        self.v_data = data.table2.entries[data.g2.values]
        self.n_data = len(self.u_data)
        if self.n_data == 0:
            raise ValueError("training requires at least one feature pair")
        tuple_u = np.concatenate([gu, nu, self.u_data])
        tuple_v = np.concatenate([gv, nv, self.v_data])
        self.n_tuple = len(tuple_u)
        self.delta2 = (1.0 / (config.n4 - 1)) ** 2

        self.tuple_work = TupleWork(layer_sizes, self.n_tuple)
        self.tuple_work.set_points(tuple_u, tuple_v)
        self.value_work = ValueWork(layer_sizes, len(values_u))
        self.value_work.set_points(np.stack([values_u, values_v], axis=1))
        self.gbar = np.zeros((4, self.n_tuple, 1))


def _loss_and_grads(net: CopulaNet, prep: _Prepared):
    """All five losses plus the gradient of their weighted sum."""
    cfg = prep.config
    w = cfg.weights

    c_values = _forward_values(net, prep.value_work)
    m = _forward_tuple(net, prep.tuple_work)
    duv = m[3, :, 0]

    nb = prep.n_bnd
    bnd_res = c_values[:nb] - prep.bnd_target
    obs_res = c_values[nb:] - prep.obs_target
    l_boundary = float(np.sum(np.abs(bnd_res)))
    l_observation = float(np.sum(np.abs(obs_res)))

    ng = prep.n_grid
    duv_grid = duv[:ng]
    pdf_grid = np.maximum(duv_grid, 0.0) + cfg.rho
    integral_gap = 1.0 - np.sum(pdf_grid) * prep.delta2
    l_integration = float(np.abs(integral_gap))

    duv_nonneg = duv_grid if prep.shared_grid else duv[ng : ng + prep.n_nonneg]
    l_nonneg = float(np.sum(np.maximum(-duv_nonneg, 0.0)) / cfg.n5**2)

    duv_data = duv[len(duv) - prep.n_data :]
    pdf_data = np.maximum(duv_data, 0.0) + cfg.rho
    ml_gap = cfg.eta - np.sum(np.log(pdf_data))
    l_ml = float(np.abs(ml_gap) / prep.n_data)

    parts = (l_boundary, l_integration, l_nonneg, l_ml, l_observation)
    total = float(np.dot(parts, w.as_tuple()))

    # output adjoints; |x| contributes sign(x), ReLU gates on positivity
    cbar_values = np.concatenate(
        [w.boundary * np.sign(bnd_res), w.observation * np.sign(obs_res)]
    )
    duv_bar = np.zeros_like(duv)
    duv_bar[:ng] += (
        -w.integration * np.sign(integral_gap) * prep.delta2 * (duv_grid > 0.0)
    )
    if prep.shared_grid:
        duv_bar[:ng] += -w.nonneg / cfg.n5**2 * (duv_grid < 0.0)
    else:
        duv_bar[ng : ng + prep.n_nonneg] = (
            -w.nonneg / cfg.n5**2 * (duv_nonneg < 0.0)
        )
    duv_bar[len(duv) - prep.n_data :] += (
        -w.ml * np.sign(ml_gap) / prep.n_data * (duv_data > 0.0) / pdf_data
    )

    grad = _backward_values(net, prep.value_work, cbar_values)
    prep.gbar[3, :, 0] = duv_bar
    grad += _backward_tuple(net, prep.tuple_work, prep.gbar)
    return parts, total, grad


def train(
    net: CopulaNet,
    g1: FeatureSet,
    g2: FeatureSet,
    table1: CdfTable,
    table2: CdfTable,
    config: TrainConfig,
    progress=None,
) -> tuple[CopulaNet, np.ndarray]:
    """Run full-batch training; return the minimum-loss snapshot and the
    per-epoch loss history.

    History has one row per epoch with columns LOSS_COLUMNS, each row
    evaluated at the parameters *before* that epoch's update. The returned
    network is the snapshot with the lowest recorded total loss (the
    initial network when epochs == 0). ``progress``, if given, is called
    as ``progress(epoch, total_loss)`` every 100 epochs.

    Raises DivergenceError as soon as the loss stops being finite.
    """
    prep = _Prepared(TrainingData(g1, g2, table1, table2), config, net.layer_sizes)
    theta = flatten_params(net)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    history = np.empty((config.epochs, len(LOSS_COLUMNS)))
    best_total = np.inf
    best_theta = theta.copy()
    lr = config.learning_rate

    for epoch in range(config.epochs):
        parts, total, grad = _loss_and_grads(with_params(net, theta), prep)
        if not np.isfinite(total) or not np.all(np.isfinite(grad)):
            raise DivergenceError(epoch)
        history[epoch, :5] = parts
        history[epoch, 5] = total
        if total < best_total:
            best_total = total
            best_theta = theta.copy()
        if progress is not None and epoch % 100 == 0:
            progress(epoch, total)

        t = epoch + 1
        m = _BETA1 * m + (1.0 - _BETA1) * grad
        v = _BETA2 * v + (1.0 - _BETA2) * grad * grad
        m_hat = m / (1.0 - _BETA1**t)
        v_hat = v / (1.0 - _BETA2**t)
        lookahead = _BETA1 * m_hat + (1.0 - _BETA1) / (1.0 - _BETA1**t) * grad
        theta = theta - lr * lookahead / (np.sqrt(v_hat) + _EPS)

    return with_params(net, best_theta), history

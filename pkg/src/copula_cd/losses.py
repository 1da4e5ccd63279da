"""The five copula-theoretic constraint losses and their weighted sum.

Each loss accepts either a :class:`~copula_cd.network.CopulaNet` or any
callable ``(u, v) -> CopulaEval``, so analytic stand-ins can be dropped in
where a trained network would go.

Grid conventions, shared with the trainer:

* boundary: ``n`` linearly spaced points on each of the four edges,
  summed (not averaged) as |C(u,0)| + |C(0,v)| + |C(u,1)-u| + |C(1,v)-v|;
* integration: an n-by-n linspace grid including the endpoints with cell
  weight Delta^2, Delta = 1/(n-1), compared against a unit integral;
* non-negativity: the mean over an n-by-n linspace grid of ReLU(-duv),
  with duv unclamped;
* likelihood: |eta - sum(log clamped density at the data)| / N;
* observation: |C - empirical joint CDF| summed over an n-by-n grid of
  integer intensity levels pushed through the marginal tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .marginals import CdfTable, empirical_joint_cdf_grid
from .network import DEFAULT_RHO, CopulaEval, CopulaNet, forward_with_derivs
from .segmentation import FeatureSet


@dataclass(frozen=True)
class LossWeights:
    """Nonnegative mixing weights for the five constraint losses."""

    boundary: float = 2.0
    integration: float = 0.3
    nonneg: float = 1.0
    ml: float = 0.1
    observation: float = 5.0

    def __post_init__(self):
        if min(self.as_tuple()) < 0:
            raise ValueError("loss weights must be nonnegative")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.boundary, self.integration, self.nonneg, self.ml, self.observation)


@dataclass(frozen=True)
class TrainingData:
    """Paired training features and their frozen marginal tables."""

    g1: FeatureSet
    g2: FeatureSet
    table1: CdfTable
    table2: CdfTable

    def __post_init__(self):
        if len(self.g1) != len(self.g2):
            raise ValueError("training feature sets must be paired")


def _evaluate(net, u: np.ndarray, v: np.ndarray) -> CopulaEval:
    if isinstance(net, CopulaNet):
        return forward_with_derivs(net, u, v)
    return net(u, v)


def boundary_points(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Concatenated edge points (u, v) and target CDF values, 4n of each."""
    t = np.linspace(0.0, 1.0, n)
    zeros = np.zeros(n)
    ones = np.ones(n)
    u = np.concatenate([t, zeros, t, ones])
    v = np.concatenate([zeros, t, ones, t])
    target = np.concatenate([zeros, zeros, t, t])
    return u, v, target


def unit_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened n-by-n linspace grid over [0,1]^2, endpoints included."""
    t = np.linspace(0.0, 1.0, n)
    uu, vv = np.meshgrid(t, t, indexing="ij")
    return uu.ravel(), vv.ravel()


def observation_levels(n: int) -> np.ndarray:
    """n integer intensity levels spread over 0..255."""
    return np.round(np.linspace(0.0, 255.0, n)).astype(np.int64)


def loss_boundary(net, n_points: int) -> float:
    """Total absolute violation of the four copula edge identities."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    u, v, target = boundary_points(n_points)
    c = _evaluate(net, u, v).c
    return float(np.sum(np.abs(c - target)))


def loss_integration(net, n_grid: int, rho: float = DEFAULT_RHO) -> float:
    """|1 - sum of clamped density times cell area| on the unit grid."""
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    u, v = unit_grid(n_grid)
    duv = _evaluate(net, u, v).duv
    delta = 1.0 / (n_grid - 1)
    return float(np.abs(1.0 - np.sum(np.maximum(duv, 0.0) + rho) * delta**2))


def loss_nonneg(net, n_grid: int) -> float:
    """Mean rectified negative part of the unclamped mixed derivative."""
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    u, v = unit_grid(n_grid)
    duv = _evaluate(net, u, v).duv
    return float(np.sum(np.maximum(-duv, 0.0)) / n_grid**2)


def loss_ml(
    net,
    u_data: np.ndarray,
    v_data: np.ndarray,
    eta: float = 10.0,
    rho: float = DEFAULT_RHO,
) -> float:
    """Likelihood pull toward high density at the observed pairs."""
    u_data = np.asarray(u_data, dtype=np.float64)
    v_data = np.asarray(v_data, dtype=np.float64)
    if len(u_data) == 0 or len(u_data) != len(v_data):
        raise ValueError("paired data required")
    duv = _evaluate(net, u_data, v_data).duv
    pdf = np.maximum(duv, 0.0) + rho
    return float(np.abs(eta - np.sum(np.log(pdf))) / len(u_data))


def observation_targets(
    g1: FeatureSet | np.ndarray,
    g2: FeatureSet | np.ndarray,
    table1: CdfTable,
    table2: CdfTable,
    n_obs: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PIT coordinates (flattened meshes) and empirical CDF targets."""
    v1 = g1.values if isinstance(g1, FeatureSet) else np.asarray(g1)
    v2 = g2.values if isinstance(g2, FeatureSet) else np.asarray(g2)
    levels = observation_levels(n_obs)
    ubar = table1.entries[levels]
    vbar = table2.entries[levels]
    empirical = empirical_joint_cdf_grid(v1, v2, levels, levels)
    uu, vv = np.meshgrid(ubar, vbar, indexing="ij")
    return uu.ravel(), vv.ravel(), empirical.ravel()


def loss_observation(
    net,
    g1: FeatureSet | np.ndarray,
    g2: FeatureSet | np.ndarray,
    table1: CdfTable,
    table2: CdfTable,
    n_obs: int,
) -> float:
    """Total gap to the empirical joint CDF at the observation grid."""
    if n_obs < 2:
        raise ValueError("n_obs must be at least 2")
    u, v, target = observation_targets(g1, g2, table1, table2, n_obs)
    c = _evaluate(net, u, v).c
    return float(np.sum(np.abs(c - target)))


def combine_losses(
    parts: tuple[float, float, float, float, float], weights: LossWeights
) -> float:
    """Weighted sum in the fixed order boundary, integration, nonneg, ml,
    observation."""
    return float(np.dot(np.asarray(parts), np.asarray(weights.as_tuple())))


def total_loss(net, data: TrainingData, config) -> float:
    """Weighted sum of all five losses under a TrainConfig."""
    u_data = data.table1.entries[data.g1.values]
    v_data = data.table2.entries[data.g2.values]
    parts = (
        loss_boundary(net, config.n3),
        loss_integration(net, config.n4, rho=config.rho),
        loss_nonneg(net, config.n5),
        loss_ml(net, u_data, v_data, eta=config.eta, rho=config.rho),
        loss_observation(net, data.g1, data.g2, data.table1, data.table2, config.n6),
    )
    return combine_losses(parts, config.weights)

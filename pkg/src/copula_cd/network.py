"""A small fully connected network over the unit square with exact
first and mixed-second input derivatives.

The network value plays the role of a joint CDF on [0,1]^2 and its mixed
second derivative d2C/dudv plays the role of the density. Derivatives are
propagated in closed form alongside the value as a 4-tuple
(value, d/du, d/dv, d2/dudv) through every layer; an affine layer maps
all four components linearly and an activation s maps

    (a, au, av, auv) -> (s(a), s'(a)au, s'(a)av, s''(a)au av + s'(a)auv).

The matching reverse pass (used by the trainer) backpropagates through
the same tuple, which requires activation derivatives up to third order,
so hidden activations must be smooth.

Training evaluates the same fixed point sets every epoch, so the passes
write into preallocated workspaces; one-off evaluations build a
throwaway workspace internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_RHO = 1e-9


class _Tanh:
    name = "tanh"

    @staticmethod
    def f_into(z, out):
        np.tanh(z, out=out)

    @staticmethod
    def d1_into(p, out):
        np.multiply(p, p, out=out)
        np.subtract(1.0, out, out=out)

    @staticmethod
    def d2_into(p, d1, out):
        np.multiply(p, d1, out=out)
        out *= -2.0

    @staticmethod
    def d3_into(p, d1, out):
        # -2 (1 - p^2)(1 - 3 p^2) = d1 * (6 p^2 - 2)
        np.multiply(p, p, out=out)
        out *= 6.0
        out -= 2.0
        out *= d1


class _Sigmoid:
    name = "sigmoid"

    @staticmethod
    def f_into(z, out):
        np.negative(z, out=out)
        np.exp(out, out=out)
        out += 1.0
        np.reciprocal(out, out=out)

    @staticmethod
    def d1_into(p, out):
        np.subtract(1.0, p, out=out)
        out *= p

    @staticmethod
    def d2_into(p, d1, out):
        np.multiply(p, -2.0, out=out)
        out += 1.0
        out *= d1

    @staticmethod
    def d3_into(p, d1, out):
        np.multiply(p, p, out=out)
        out -= p
        out *= 6.0
        out += 1.0
        out *= d1


class _Identity:
    name = "identity"

    @staticmethod
    def f_into(z, out):
        np.copyto(out, z)

    @staticmethod
    def d1_into(p, out):
        out.fill(1.0)

    @staticmethod
    def d2_into(p, d1, out):
        out.fill(0.0)

    @staticmethod
    def d3_into(p, d1, out):
        out.fill(0.0)


ACTIVATIONS = {a.name: a for a in (_Tanh, _Sigmoid, _Identity)}


@dataclass
class CopulaNet:
    """Weights and biases of the copula network: 2 inputs, 1 output."""

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray] = field(repr=False)  # per layer, shape (out, in)
    biases: list[np.ndarray] = field(repr=False)
    hidden_activation: str = "tanh"
    output_activation: str = "sigmoid"

    def __post_init__(self):
        if self.layer_sizes[0] != 2 or self.layer_sizes[-1] != 1:
            raise ValueError("network must map 2 inputs to 1 output")
        if self.hidden_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.hidden_activation!r}")
        if self.output_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.output_activation!r}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (self.layer_sizes[i + 1], self.layer_sizes[i])
            if w.shape != expect or b.shape != (expect[0],):
                raise ValueError(f"layer {i} parameter shape mismatch")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def _acts(self) -> list:
        acts = [ACTIVATIONS[self.hidden_activation]] * (self.n_layers - 1)
        acts.append(ACTIVATIONS[self.output_activation])
        return acts

    def copy(self) -> "CopulaNet":
        return replace(
            self,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass(frozen=True)
class CopulaEval:
    """Network outputs at (u, v): CDF value, partials, and clamped density."""

    c: np.ndarray | float
    du: np.ndarray | float
    dv: np.ndarray | float
    duv: np.ndarray | float
    pdf: np.ndarray | float


def init_net(
    layer_sizes: tuple[int, ...] | list[int],
    seed: int,
    hidden_activation: str = "tanh",
    output_activation: str = "sigmoid",
) -> CopulaNet:
    """Glorot-uniform weights from the given seed, zero biases."""
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in layer_sizes)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return CopulaNet(
        layer_sizes=sizes,
        weights=weights,
        biases=biases,
        hidden_activation=hidden_activation,
        output_activation=output_activation,
    )


def flatten_params(net: CopulaNet) -> np.ndarray:
    return np.concatenate(
        [w.ravel() for w in net.weights] + [b.ravel() for b in net.biases]
    )


def with_params(net: CopulaNet, flat: np.ndarray) -> CopulaNet:
    """A copy of ``net`` with parameters taken from a flat vector."""
    weights, biases = [], []
    pos = 0
    for w in net.weights:
        weights.append(flat[pos : pos + w.size].reshape(w.shape).copy())
        pos += w.size
    for b in net.biases:
        biases.append(flat[pos : pos + b.size].copy())
        pos += b.size
    if pos != len(flat):
        raise ValueError("parameter vector length mismatch")
    return replace(net, weights=weights, biases=biases)


class TupleWork:
    """Preallocated buffers for the 4-tuple forward and reverse passes."""

    def __init__(self, layer_sizes: tuple[int, ...], n: int):
        self.n = n
        self.m0 = np.zeros((4, n, 2))
        self.m0[1, :, 0] = 1.0
        self.m0[2, :, 1] = 1.0
        outs = layer_sizes[1:]
        self.z = [np.empty((4, n, w)) for w in outs]
        self.out = [np.empty((4, n, w)) for w in outs]
        self.gb = [np.empty((4, n, w)) for w in outs]
        self.zb = [np.empty((4, n, w)) for w in outs]
        self.s1 = [np.empty((n, w)) for w in outs]
        self.s2 = [np.empty((n, w)) for w in outs]
        self.s3 = [np.empty((n, w)) for w in outs]
        self.t = [np.empty((n, w)) for w in outs]

    def set_points(self, u: np.ndarray, v: np.ndarray) -> None:
        self.m0[0, :, 0] = u
        self.m0[0, :, 1] = v


class ValueWork:
    """Preallocated buffers for the value-only passes."""

    def __init__(self, layer_sizes: tuple[int, ...], n: int):
        self.n = n
        self.x0 = np.empty((n, 2))
        outs = layer_sizes[1:]
        self.out = [np.empty((n, w)) for w in outs]
        self.gb = [np.empty((n, w)) for w in outs]
        self.s1 = [np.empty((n, w)) for w in outs]

    def set_points(self, x: np.ndarray) -> None:
        np.copyto(self.x0, x)


def _forward_tuple(net: CopulaNet, work: TupleWork) -> np.ndarray:
    """Tuple pass over work.m0; returns the output tuple view (4, n, 1)."""
    m = work.m0
    for i, (w, b, act) in enumerate(zip(net.weights, net.biases, net._acts())):
        z, out = work.z[i], work.out[i]
        np.matmul(m, w.T, out=z)
        z[0] += b
        p, s1, s2, t = out[0], work.s1[i], work.s2[i], work.t[i]
        act.f_into(z[0], p)
        act.d1_into(p, s1)
        np.multiply(s1, z[1], out=out[1])
        np.multiply(s1, z[2], out=out[2])
        act.d2_into(p, s1, s2)
        np.multiply(s2, z[1], out=out[3])
        out[3] *= z[2]
        np.multiply(s1, z[3], out=t)
        out[3] += t
        m = out
    return m


def _backward_tuple(net: CopulaNet, work: TupleWork, gbar: np.ndarray) -> np.ndarray:
    """Parameter gradient of sum(gbar * output tuple); gbar is (4, n, 1).

    Must follow a matching _forward_tuple on the same workspace.
    """
    grads_w = [None] * net.n_layers
    grads_b = [None] * net.n_layers
    acts = net._acts()
    np.copyto(work.gb[-1], gbar)
    for i in range(net.n_layers - 1, -1, -1):
        g = work.gb[i]
        z, out, zb = work.z[i], work.out[i], work.zb[i]
        p = out[0]
        s1, s2, s3, t = work.s1[i], work.s2[i], work.s3[i], work.t[i]
        act = acts[i]
        act.d1_into(p, s1)
        act.d2_into(p, s1, s2)
        act.d3_into(p, s1, s3)

        np.multiply(g[3], s1, out=zb[3])
        np.multiply(g[1], s1, out=zb[1])
        np.multiply(g[3], s2, out=t)
        t *= z[2]
        zb[1] += t
        np.multiply(g[2], s1, out=zb[2])
        np.multiply(g[3], s2, out=t)
        t *= z[1]
        zb[2] += t
        np.multiply(g[0], s1, out=zb[0])
        np.multiply(g[1], s2, out=t)
        t *= z[1]
        zb[0] += t
        np.multiply(g[2], s2, out=t)
        t *= z[2]
        zb[0] += t
        np.multiply(g[3], s3, out=t)
        t *= z[1]
        t *= z[2]
        zb[0] += t
        np.multiply(g[3], s2, out=t)
        t *= z[3]
        zb[0] += t

        a_in = work.m0 if i == 0 else work.out[i - 1]
        n_in = a_in.shape[2]
        zb2 = zb.reshape(-1, zb.shape[2])
        grads_w[i] = zb2.T @ a_in.reshape(-1, n_in)
        grads_b[i] = zb[0].sum(axis=0)
        if i > 0:
            np.matmul(zb2, net.weights[i], out=work.gb[i - 1].reshape(-1, n_in))
    return np.concatenate(
        [gw.ravel() for gw in grads_w] + [gb.ravel() for gb in grads_b]
    )


def _forward_values(net: CopulaNet, work: ValueWork) -> np.ndarray:
    """Value-only pass over work.x0; returns the output column (n,)."""
    a = work.x0
    for i, (w, b, act) in enumerate(zip(net.weights, net.biases, net._acts())):
        out = work.out[i]
        np.matmul(a, w.T, out=out)
        out += b
        act.f_into(out, out)
        a = out
    return a[:, 0]


def _backward_values(net: CopulaNet, work: ValueWork, cbar: np.ndarray) -> np.ndarray:
    grads_w = [None] * net.n_layers
    grads_b = [None] * net.n_layers
    acts = net._acts()
    np.copyto(work.gb[-1], cbar[:, None])
    for i in range(net.n_layers - 1, -1, -1):
        p, s1, zb = work.out[i], work.s1[i], work.gb[i]
        acts[i].d1_into(p, s1)
        zb *= s1
        a_in = work.x0 if i == 0 else work.out[i - 1]
        grads_w[i] = zb.T @ a_in
        grads_b[i] = zb.sum(axis=0)
        if i > 0:
            np.matmul(zb, net.weights[i], out=work.gb[i - 1])
    return np.concatenate(
        [gw.ravel() for gw in grads_w] + [gb.ravel() for gb in grads_b]
    )


def forward_with_derivs(
    net: CopulaNet,
    u: np.ndarray | float,
    v: np.ndarray | float,
    rho: float = DEFAULT_RHO,
) -> CopulaEval:
    """Evaluate CDF value, both first partials, the mixed second partial,
    and the clamped density ReLU(duv) + rho.

    Accepts scalars or equal-length arrays; raises on non-finite outputs,
    which signal divergent weights.
    """
    scalar = np.isscalar(u) and np.isscalar(v)
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64)).ravel()
    v_arr = np.atleast_1d(np.asarray(v, dtype=np.float64)).ravel()
    if u_arr.shape != v_arr.shape:
        raise ValueError("u and v must have the same shape")
    work = TupleWork(net.layer_sizes, len(u_arr))
    work.set_points(u_arr, v_arr)
    m = _forward_tuple(net, work)
    c, du, dv, duv = (m[k, :, 0].copy() for k in range(4))
    if not (
        np.all(np.isfinite(c)) and np.all(np.isfinite(du))
        and np.all(np.isfinite(dv)) and np.all(np.isfinite(duv))
    ):
        raise FloatingPointError("non-finite network output (divergent weights?)")
    pdf = np.maximum(duv, 0.0) + rho
    if scalar:
        return CopulaEval(
            c=float(c[0]), du=float(du[0]), dv=float(dv[0]),
            duv=float(duv[0]), pdf=float(pdf[0]),
        )
    return CopulaEval(c=c, du=du, dv=dv, duv=duv, pdf=pdf)

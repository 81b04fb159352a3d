"""Minimal dense networks with exact analytic backprop and Adam updates.

Everything is plain numpy.  A DenseNet is an ordered list of affine layers
with relu/tanh/linear activations; forward() returns the output together
with a cache that backward() consumes to produce exact parameter gradients
(verified against central finite differences in the test suite).
"""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "tanh", "linear")


class NonFiniteError(FloatingPointError):
    """A forward pass or loss produced a non-finite value."""


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _act_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(z.dtype)
    if kind == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


class DenseLayer:
    def __init__(self, W: np.ndarray, b: np.ndarray, activation: str):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.W = W
        self.b = b
        self.activation = activation


class DenseNet:
    """Stack of affine+activation layers operating on (batch, dim) arrays."""

    def __init__(self, layers: list[DenseLayer]):
        self.layers = layers
        for prev, nxt in zip(layers, layers[1:]):
            if prev.W.shape[0] != nxt.W.shape[1]:
                raise ValueError("consecutive layer dimensions do not conform")

    @classmethod
    def build(cls, dims: list[int], activations: list[str], rng: np.random.Generator) -> "DenseNet":
        """He init for relu layers, Xavier for tanh/linear."""
        if len(activations) != len(dims) - 1:
            raise ValueError("need one activation per layer")
        layers = []
        for d_in, d_out, act in zip(dims, dims[1:], activations):
            if act == "relu":
                scale = np.sqrt(2.0 / d_in)
            else:
                scale = np.sqrt(1.0 / d_in)
            W = rng.normal(0.0, scale, size=(d_out, d_in))
            b = np.zeros(d_out)
            layers.append(DenseLayer(W, b, act))
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].W.shape[0]

    def parameters(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend((layer.W, layer.b))
        return out

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x: np.ndarray):
        """Returns (output, cache); x may be (dim,) or (batch, dim)."""
        squeeze = x.ndim == 1
        a = np.atleast_2d(np.asarray(x, dtype=float))
        if a.shape[1] != self.in_dim:
            raise ValueError(f"expected input dim {self.in_dim}, got {a.shape[1]}")
        cache = [(None, a)]
        for layer in self.layers:
            z = a @ layer.W.T + layer.b
            a = _act(z, layer.activation)
            cache.append((z, a))
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("non-finite network output")
        return (a[0] if squeeze else a), cache

    def backward(self, cache, grad_out: np.ndarray):
        """Exact gradients for a forward cache.

        grad_out is dLoss/d(output), shaped like the cached output.  Returns
        (grads, grad_input) where grads mirrors parameters() order.
        """
        g = np.atleast_2d(np.asarray(grad_out, dtype=float))
        grads: list[np.ndarray] = []
        for idx in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[idx]
            z, a = cache[idx + 1]
            a_prev = cache[idx][1]
            dz = g * _act_grad(z, a, layer.activation)
            grads.append(dz.T @ a_prev)  # dW
            grads.append(dz.sum(axis=0))  # db
            g = dz @ layer.W
        grads.reverse()
        # Reorder: we appended (dW, db) while walking backwards, so after
        # reversing, pairs read (db, dW) per layer; swap back.
        ordered = []
        for k in range(0, len(grads), 2):
            ordered.extend((grads[k + 1], grads[k]))
        return ordered, g

    def copy(self) -> "DenseNet":
        return DenseNet(
            [DenseLayer(l.W.copy(), l.b.copy(), l.activation) for l in self.layers]
        )


class Adam:
    """Adaptive moment estimation over a list of parameter arrays (in place)."""

    def __init__(self, params: list[np.ndarray], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray], lr_scale: float = 1.0) -> None:
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameter list")
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= (self.lr * lr_scale) * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def polyak_update(target: DenseNet, online: DenseNet, tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, element-wise."""
    for tl, ol in zip(target.layers, online.layers):
        tl.W *= 1.0 - tau
        tl.W += tau * ol.W
        tl.b *= 1.0 - tau
        tl.b += tau * ol.b


def zeros_like_params(net: DenseNet) -> list[np.ndarray]:
    return [np.zeros_like(p) for p in net.parameters()]


def add_grads(acc: list[np.ndarray], grads: list[np.ndarray], scale: float = 1.0) -> None:
    for a, g in zip(acc, grads):
        a += scale * g

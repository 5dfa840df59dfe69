"""Dense feed-forward layers with explicit forward/backward passes.

Two layer kinds:

* ``DenseLayer``: y = f(x W^T + b).
* ``MonotoneDenseLayer``: weights flow through an elementwise exponential
  before the affine map, either on a masked subset of input columns (input
  layer: only the constrained features) or on the whole matrix (hidden and
  output layers).  Positive effective weights plus nondecreasing
  activations make the network output nondecreasing in the masked inputs
  for any parameter values.

Layers cache their inputs during ``forward``; ``backward`` consumes the
cache, so the call order forward -> backward is enforced per batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ShapeError, StateError
from .rng import Rng


@dataclass(frozen=True)
class Activation:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]  # derivative as a function of the pre-activation


TANH = Activation("tanh", np.tanh, lambda a: 1.0 - np.tanh(a) ** 2)
SIGMOID = Activation(
    "sigmoid",
    lambda a: 1.0 / (1.0 + np.exp(-a)),
    lambda a: (s := 1.0 / (1.0 + np.exp(-a))) * (1.0 - s),
)
RELU = Activation("relu", lambda a: np.maximum(a, 0.0), lambda a: (a > 0.0).astype(np.float64))
IDENTITY = Activation("identity", lambda a: a, lambda a: np.ones_like(a))

ACTIVATIONS = {act.name: act for act in (TANH, SIGMOID, RELU, IDENTITY)}


class DenseLayer:
    """Fully connected layer, weights (out, in), bias (out,)."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray, activation: Activation):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.ndim != 1 or bias.shape[0] != weights.shape[0]:
            raise ShapeError(f"weights {weights.shape} and bias {bias.shape} are inconsistent")
        self.weights = weights
        self.bias = bias
        self.activation = activation
        self.grad_weights = np.zeros_like(weights)
        self.grad_bias = np.zeros_like(bias)
        self._cache = None

    @property
    def in_width(self) -> int:
        return self.weights.shape[1]

    @property
    def out_width(self) -> int:
        return self.weights.shape[0]

    def effective_weights(self) -> np.ndarray:
        return self.weights

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_width:
            raise ShapeError(f"batch {x.shape} does not match layer input width {self.in_width}")
        pre = x @ self.effective_weights().T + self.bias
        self._cache = (x, pre)
        return self.activation.fn(pre)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Returns the input gradient; weight/bias gradients are stored."""
        if self._cache is None:
            raise StateError("backward called before forward")
        x, pre = self._cache
        self._cache = None
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != (x.shape[0], self.out_width):
            raise ShapeError(f"gradient {grad_out.shape} does not match output {(x.shape[0], self.out_width)}")
        d_pre = grad_out * self.activation.deriv(pre)
        w_eff = self.effective_weights()
        self._store_weight_grad(d_pre.T @ x)
        self.grad_bias = d_pre.sum(axis=0)
        return d_pre @ w_eff

    def _store_weight_grad(self, grad_eff: np.ndarray):
        self.grad_weights = grad_eff

    def parameters(self) -> list[np.ndarray]:
        return [self.weights, self.bias]

    def gradients(self) -> list[np.ndarray]:
        return [self.grad_weights, self.grad_bias]


class MonotoneDenseLayer(DenseLayer):
    """Dense layer whose masked input columns use exp(W) as weights.

    ``mask`` marks the input features constrained to act monotonically.
    Hidden/output layers of a monotone network pass ``mask=None`` meaning
    every column is exponentiated, which preserves monotonicity end to end.
    Biases are never exponentiated.
    """

    def __init__(self, weights, bias, activation, mask=None):
        super().__init__(weights, bias, activation)
        if mask is None:
            mask = np.ones(self.in_width, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (self.in_width,):
                raise ShapeError(f"mask {mask.shape} does not match input width {self.in_width}")
        self.mask = mask

    def effective_weights(self) -> np.ndarray:
        w = self.weights.copy()
        w[:, self.mask] = np.exp(self.weights[:, self.mask])
        return w

    def _store_weight_grad(self, grad_eff: np.ndarray):
        # chain rule through exp: d(exp(w) x)/dw = exp(w) x
        grad = grad_eff.copy()
        grad[:, self.mask] *= np.exp(self.weights[:, self.mask])
        self.grad_weights = grad


def glorot_limit(fan_in: int, fan_out: int) -> float:
    return np.sqrt(6.0 / (fan_in + fan_out))


def init_params(widths: list[int], rng: Rng, scheme: str = "glorot_uniform"):
    """Per-layer (weights, bias) pairs for a stack of dense layers.

    ``widths`` runs input -> hidden... -> output.  Weights are uniform on
    +/- sqrt(6 / (fan_in + fan_out)); biases start at zero.  The same seed
    always yields the same parameters.
    """
    if scheme != "glorot_uniform":
        raise ValueError(f"unknown init scheme {scheme!r}")
    if len(widths) < 2:
        raise ValueError("need at least an input and an output width")
    params = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        lim = glorot_limit(fan_in, fan_out)
        w = rng.uniform(-lim, lim, fan_out * fan_in).reshape(fan_out, fan_in)
        params.append((w, np.zeros(fan_out)))
    return params


class Mlp:
    """A stack of layers with a shared forward/backward protocol."""

    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ValueError("need at least one layer")
        for prev, nxt in zip(layers[:-1], layers[1:]):
            if prev.out_width != nxt.in_width:
                raise ShapeError(f"layer widths {prev.out_width} -> {nxt.in_width} do not chain")
        self.layers = layers

    @property
    def in_width(self) -> int:
        return self.layers[0].in_width

    @property
    def out_width(self) -> int:
        return self.layers[-1].out_width

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad_out = layer.backward(grad_out)
        return grad_out

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.gradients()]


def build_mlp(widths: list[int], activation: Activation, rng: Rng) -> Mlp:
    """Plain MLP: hidden layers use ``activation``, the output layer is
    linear (quantile outputs are unbounded reals)."""
    params = init_params(widths, rng)
    layers = []
    for i, (w, b) in enumerate(params):
        act = IDENTITY if i == len(params) - 1 else activation
        layers.append(DenseLayer(w, b, act))
    return Mlp(layers)


def build_monotone_mlp(widths: list[int], activation: Activation, rng: Rng,
                       input_mask: np.ndarray) -> Mlp:
    """Monotone MLP: masked exp weights on the input layer, fully
    exponentiated weights on every later layer (output included, so the
    monotone relationship survives to the final linear map)."""
    params = init_params(widths, rng)
    layers = []
    for i, (w, b) in enumerate(params):
        act = IDENTITY if i == len(params) - 1 else activation
        mask = input_mask if i == 0 else None
        layers.append(MonotoneDenseLayer(w, b, act, mask=mask))
    return Mlp(layers)


def flatten_params(params: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def unflatten_params(flat: np.ndarray, like: list[np.ndarray]) -> list[np.ndarray]:
    out = []
    offset = 0
    for p in like:
        out.append(flat[offset:offset + p.size].reshape(p.shape).copy())
        offset += p.size
    if offset != flat.size:
        raise ShapeError(f"flat array has {flat.size} entries, expected {offset}")
    return out

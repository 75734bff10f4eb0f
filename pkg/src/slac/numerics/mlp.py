"""Plain MLP with exact reverse-mode gradients.

ReLU on hidden layers, linear output.  Forward works on a single input
vector or a batch (leading axis); batched backward sums parameter
gradients over the batch, matching a summed loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from slac.errors import ConfigError, UsageError
from slac.numerics.rng import RngStream


@dataclass
class MlpParams:
    """Layer parameters: weights[i] is (fan_in, fan_out), biases[i] is (fan_out,)."""

    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def sizes(self) -> list:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def arrays(self) -> list:
        """Flat parameter list, declaration order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self) -> "MlpParams":
        return MlpParams(
            [np.zeros_like(w) for w in self.weights],
            [np.zeros_like(b) for b in self.biases],
        )


@dataclass
class MlpCache:
    x: np.ndarray
    pre: list  # pre-activations per layer
    post: list  # post-activations per hidden layer


def init_mlp(sizes: Sequence[int], rng: RngStream) -> MlpParams:
    """Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases."""
    if len(sizes) < 2:
        raise ConfigError(f"MLP needs at least input and output sizes, got {list(sizes)}")
    params = MlpParams()
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        params.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.biases.append(rng.uniform(-bound, bound, size=(fan_out,)))
    return params


def mlp_forward(params: MlpParams, x: np.ndarray) -> tuple:
    """Forward pass; returns (output, cache) with cache holding activations."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.weights[0].shape[0]:
        raise ConfigError(
            f"input width {x.shape[-1]} does not match first layer fan_in "
            f"{params.weights[0].shape[0]}"
        )
    pre, post = [], []
    h = x
    last = params.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        if i < last:
            h = np.maximum(z, 0.0)
            post.append(h)
        else:
            h = z
    return h, MlpCache(x=x, pre=pre, post=post)


def mlp_backward(params: MlpParams, cache: MlpCache, grad_out: np.ndarray) -> tuple:
    """Exact gradients of the forward map.

    Returns (grads, grad_input) where grads mirrors params and grad_input
    has the shape of the forward input.  For batched input the parameter
    gradients are summed over the batch.
    """
    if cache is None:
        raise UsageError("mlp_backward needs the cache from a matching mlp_forward call")
    grads = params.zeros_like()
    g = np.asarray(grad_out, dtype=np.float64)
    batched = cache.x.ndim == 2
    for i in range(params.n_layers - 1, -1, -1):
        if i < params.n_layers - 1:
            g = g * (cache.pre[i] > 0.0)
        h_in = cache.post[i - 1] if i > 0 else cache.x
        if batched:
            grads.weights[i] += h_in.T @ g
            grads.biases[i] += g.sum(axis=0)
        else:
            grads.weights[i] += np.outer(h_in, g)
            grads.biases[i] += g
        g = g @ params.weights[i].T
    return grads, g

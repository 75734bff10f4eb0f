"""Small convenience wrapper tying an MLP to its optimizer and target copy."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from slac.numerics import AdamState, MlpParams, RngStream, adam_step, init_mlp, mlp_backward, mlp_forward


class Network:
    """MLP + Adam state; optionally paired with a Polyak-averaged target."""

    def __init__(self, sizes: Sequence[int], rng: RngStream):
        self.params = init_mlp(sizes, rng)
        self.opt = AdamState.for_params(self.params.arrays())

    def forward(self, x: np.ndarray) -> tuple:
        return mlp_forward(self.params, x)

    def backward(self, cache, grad_out: np.ndarray) -> tuple:
        return mlp_backward(self.params, cache, grad_out)

    def apply_grads(self, grads: MlpParams, lr: float) -> None:
        adam_step(self.opt, self.params.arrays(), grads.arrays(), lr)

    def clone_params(self) -> MlpParams:
        return self.params.copy()


def polyak_update(target: MlpParams, online: MlpParams, tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, in place."""
    for t, o in zip(target.arrays(), online.arrays()):
        t *= 1.0 - tau
        t += tau * o


def one_hot(codes: np.ndarray, k: int) -> np.ndarray:
    """(..., n) integer codes -> (..., n*k) concatenated one-hot blocks."""
    codes = np.asarray(codes, dtype=np.int64)
    flat = np.eye(k)[codes]
    return flat.reshape(*codes.shape[:-1], codes.shape[-1] * k)

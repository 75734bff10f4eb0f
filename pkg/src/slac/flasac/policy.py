"""Task policy: MLP trunk with N categorical heads of K logits each.

The joint distribution factorizes across heads, so the joint log-prob is
the sum of per-head log-probs and sampling is per-head categorical.
"""

from __future__ import annotations

import numpy as np

from slac.nets import Network
from slac.numerics import RngStream, categorical_entropy, log_softmax
from slac.numerics.mlp import mlp_backward, mlp_forward


class TaskPolicy:
    def __init__(self, obs_dim: int, n_dims: int, n_codes: int, hidden, rng: RngStream):
        self.obs_dim = obs_dim
        self.n_dims = n_dims
        self.n_codes = n_codes
        self.net = Network([obs_dim, *hidden, n_dims * n_codes], rng)

    def logits(self, obs: np.ndarray) -> tuple:
        """(B, N, K) head logits plus the forward cache."""
        out, cache = mlp_forward(self.net.params, obs)
        return out.reshape(*out.shape[:-1], self.n_dims, self.n_codes), cache

    def sample_with_logprob(self, obs: np.ndarray, rng: RngStream) -> tuple:
        """Per-head categorical sample; returns (codes (..., N), joint log-prob (...))."""
        logits, _ = self.logits(obs)
        # Gumbel-argmax draws exactly from softmax(logits) per head
        codes = np.argmax(logits + rng.gumbel(size=logits.shape), axis=-1)
        logp = log_softmax(logits)
        picked = np.take_along_axis(logp, codes[..., None], axis=-1)[..., 0]
        return codes, picked.sum(axis=-1)

    def greedy(self, obs: np.ndarray) -> np.ndarray:
        logits, _ = self.logits(obs)
        return np.argmax(logits, axis=-1)

    def entropy(self, obs: np.ndarray) -> np.ndarray:
        """Per-head entropies, shape (..., N)."""
        logits, _ = self.logits(obs)
        return categorical_entropy(logits)

    def apply_logit_grads(self, cache, grad_logits: np.ndarray, lr: float) -> None:
        """One Adam step from d(loss)/d(logits), shape (B, N, K)."""
        flat = grad_logits.reshape(*grad_logits.shape[:-2], self.n_dims * self.n_codes)
        grads, _ = mlp_backward(self.net.params, cache, flat)
        self.net.apply_grads(grads, lr)


def select_latent(policy: TaskPolicy, obs: np.ndarray, mode: str, rng: RngStream | None = None) -> np.ndarray:
    """One latent action for a single observation; mode is 'stochastic' or 'greedy'."""
    obs = np.asarray(obs, dtype=np.float64)
    if mode == "greedy":
        return policy.greedy(obs)
    if mode == "stochastic":
        if rng is None:
            raise ValueError("stochastic selection needs an RngStream")
        codes, _ = policy.sample_with_logprob(obs, rng)
        return codes
    raise ValueError(f"unknown selection mode {mode!r}")

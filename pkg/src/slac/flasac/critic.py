"""Factored critic: one twin Q-head per reward term with adjacency masking.

Head i reads [observation ; mask(B_i) * onehot(z)].  Masked-out latent
coordinates are zeroed before the network, so a head's output is exactly
invariant to the dimensions its reward term cannot depend on.
"""

from __future__ import annotations

import numpy as np

from slac.flasac.adjacency import expand_mask, validate_adjacency
from slac.nets import Network, one_hot, polyak_update
from slac.numerics import RngStream
from slac.numerics.mlp import mlp_forward


class FactoredCritic:
    def __init__(
        self,
        obs_dim: int,
        n_dims: int,
        n_codes: int,
        adjacency: np.ndarray,
        hidden,
        rng: RngStream,
    ):
        self.obs_dim = obs_dim
        self.n_dims = n_dims
        self.n_codes = n_codes
        self.adjacency = np.asarray(adjacency, dtype=np.float64)
        self.n_terms = self.adjacency.shape[0]
        self.masks = expand_mask(self.adjacency, n_codes)  # (m, N*K)
        in_dim = obs_dim + n_dims * n_codes
        self.heads = []  # [(online twin A, online twin B), ...]
        self.targets = []  # [(params A, params B), ...]
        for i in range(self.n_terms):
            a = Network([in_dim, *hidden, 1], rng.split(f"head{i}a"))
            b = Network([in_dim, *hidden, 1], rng.split(f"head{i}b"))
            self.heads.append((a, b))
            self.targets.append((a.clone_params(), b.clone_params()))

    def head_input(self, i: int, obs: np.ndarray, z_onehot: np.ndarray) -> np.ndarray:
        return np.concatenate([obs, z_onehot * self.masks[i]], axis=-1)

    def q_online(self, i: int, obs: np.ndarray, z_onehot: np.ndarray) -> tuple:
        """Min over the twin pair; returns (q, take_first mask, caches)."""
        x = self.head_input(i, obs, z_onehot)
        qa, ca = mlp_forward(self.heads[i][0].params, x)
        qb, cb = mlp_forward(self.heads[i][1].params, x)
        take_a = qa[..., 0] <= qb[..., 0]
        return np.where(take_a, qa[..., 0], qb[..., 0]), take_a, (ca, cb)

    def q_target(self, i: int, obs: np.ndarray, z_onehot: np.ndarray) -> np.ndarray:
        x = self.head_input(i, obs, z_onehot)
        qa, _ = mlp_forward(self.targets[i][0], x)
        qb, _ = mlp_forward(self.targets[i][1], x)
        return np.minimum(qa, qb)[..., 0]

    def polyak(self, tau: float) -> None:
        for (a, b), (ta, tb) in zip(self.heads, self.targets):
            polyak_update(ta, a.params, tau)
            polyak_update(tb, b.params, tau)


def masked_q(critic: FactoredCritic, i: int, obs: np.ndarray, codes: np.ndarray) -> float:
    """Head-i value for hard codes z at a single observation."""
    if not 0 <= i < critic.n_terms:
        raise IndexError(f"head index {i} out of range for {critic.n_terms} terms")
    z = one_hot(np.asarray(codes), critic.n_codes)
    q, _, _ = critic.q_online(i, np.asarray(obs, dtype=np.float64), z)
    return float(q) if np.ndim(q) == 0 else q

"""Variational discriminators for the skill-discovery reward.

The per-entity discriminator q_phi is hand-built from the region
quantizer: probability p_hit on the commanded region, the remainder
spread evenly over the other codes.  The disentanglement discriminator
q_psi is a learned per-entity classifier from the complement state
s^{not i} to the entity's code, trained by cross-entropy.
"""

from __future__ import annotations

import numpy as np

from slac.nets import Network
from slac.numerics import RngStream, log_softmax, softmax
from slac.numerics.mlp import mlp_backward, mlp_forward
from slac.world.sim import quantize_region


def fixed_discriminator_logprob(entity_state: np.ndarray, code, p_hit: float = 0.97, n_codes: int = 4):
    """log q_phi(z^i | s^i): log(p_hit) on a region match, log((1-p_hit)/(K-1)) otherwise.

    entity_state is (..., 4) [px, py, vx, vy]; code broadcasts against the
    leading axes.  Returns log-probabilities with matching leading shape.
    """
    entity_state = np.asarray(entity_state, dtype=np.float64)
    region = quantize_region(entity_state[..., :2])
    hit = np.log(p_hit)
    miss = np.log((1.0 - p_hit) / (n_codes - 1))
    out = np.where(np.asarray(region) == np.asarray(code), hit, miss)
    return out if np.ndim(out) else float(out)


class DiscriminatorSet:
    """Fixed q_phi plus one learned q_psi classifier per entity."""

    def __init__(
        self,
        n_agents: int,
        n_codes: int,
        p_hit: float,
        psi_hidden,
        psi_lr: float,
        rng: RngStream,
    ):
        self.n_agents = n_agents
        self.n_codes = n_codes
        self.p_hit = p_hit
        self.psi_lr = psi_lr
        comp_dim = 4 * (n_agents - 1)
        self.psi: list = []
        if comp_dim > 0:
            for i in range(n_agents):
                self.psi.append(Network([comp_dim, *psi_hidden, n_codes], rng.split(f"psi{i}")))

    def _complement(self, entity_states: np.ndarray, i: int) -> np.ndarray:
        others = [j for j in range(self.n_agents) if j != i]
        sel = entity_states[..., others, :]
        return sel.reshape(*sel.shape[:-2], -1)

    def fixed_logprob(self, entity_states: np.ndarray, codes: np.ndarray) -> np.ndarray:
        """(..., n, 4) states and (..., n) codes -> (..., n) log q_phi values."""
        return fixed_discriminator_logprob(entity_states, codes, self.p_hit, self.n_codes)

    def psi_logprob(self, entity_states: np.ndarray, codes: np.ndarray) -> np.ndarray:
        """(..., n) log q_psi(z^i | s^{not i}); uniform when there is no complement."""
        codes = np.asarray(codes, dtype=np.int64)
        if not self.psi:
            return np.full(codes.shape, -np.log(self.n_codes))
        entity_states = np.asarray(entity_states, dtype=np.float64)
        out = np.empty(codes.shape, dtype=np.float64)
        for i in range(self.n_agents):
            logits, _ = mlp_forward(self.psi[i].params, self._complement(entity_states, i))
            logp = log_softmax(logits)
            out[..., i] = np.take_along_axis(logp, codes[..., i : i + 1], axis=-1)[..., 0]
        return out

    def psi_update(self, entity_states: np.ndarray, codes: np.ndarray) -> float:
        """One cross-entropy gradient step per entity classifier; returns the mean loss.

        No-op (returns log K, the chance-level loss) in a single-entity world.
        """
        if not self.psi:
            return float(np.log(self.n_codes))
        entity_states = np.asarray(entity_states, dtype=np.float64)
        codes = np.asarray(codes, dtype=np.int64)
        batch = entity_states.shape[0]
        losses = []
        for i in range(self.n_agents):
            x = self._complement(entity_states, i)
            logits, cache = mlp_forward(self.psi[i].params, x)
            logp = log_softmax(logits)
            picked = np.take_along_axis(logp, codes[:, i : i + 1], axis=-1)[:, 0]
            losses.append(-picked.mean())
            grad = softmax(logits)
            np.subtract.at(grad, (np.arange(batch), codes[:, i]), 1.0)
            grads, _ = mlp_backward(self.psi[i].params, cache, grad / batch)
            self.psi[i].apply_grads(grads, self.psi_lr)
        return float(np.mean(losses))

    def psi_accuracy(self, entity_states: np.ndarray, codes: np.ndarray) -> float:
        """Fraction of (entity, sample) pairs where argmax q_psi recovers the code."""
        if not self.psi:
            return 1.0 / self.n_codes
        entity_states = np.asarray(entity_states, dtype=np.float64)
        codes = np.asarray(codes, dtype=np.int64)
        hits = []
        for i in range(self.n_agents):
            logits, _ = mlp_forward(self.psi[i].params, self._complement(entity_states, i))
            hits.append(np.argmax(logits, axis=-1) == codes[..., i])
        return float(np.mean(hits))

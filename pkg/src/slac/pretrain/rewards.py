"""Intrinsic reward for decoder pretraining: skill term plus safety term."""

from __future__ import annotations

import numpy as np

from slac.numerics import RngStream
from slac.pretrain.config import Stage1Config
from slac.pretrain.discriminators import DiscriminatorSet, fixed_discriminator_logprob

__all__ = [
    "sample_skill",
    "fixed_discriminator_logprob",
    "skill_reward",
    "safety_reward",
    "latent_reward",
]


def sample_skill(rng: RngStream, n_dims: int, n_codes: int, size=None) -> np.ndarray:
    """Uniform independent codes per latent dimension; shape (..., n_dims)."""
    shape = (n_dims,) if size is None else (size, n_dims)
    return rng.integers(0, n_codes, size=shape)


def skill_reward(
    entity_states: np.ndarray,
    codes: np.ndarray,
    discriminators: DiscriminatorSet,
    lam: float,
    use_raw_prob: bool = False,
    clip_psi_penalty: bool = False,
):
    """sum_i [ log q_phi(z^i|s^i) - lam * log q_psi(z^i|s^{not i}) ].

    entity_states is (..., n, 4), codes (..., n); returns (...) rewards.
    use_raw_prob swaps log-probabilities for raw probabilities (ablation).
    clip_psi_penalty floors log q_psi at log(1/K), the chance level: the
    entropy this penalty bounds cannot exceed log K, and paying the policy
    past that point only rewards adversarially fooling the classifier.
    """
    logp_phi = discriminators.fixed_logprob(entity_states, codes)
    logp_psi = discriminators.psi_logprob(entity_states, codes)
    if clip_psi_penalty:
        logp_psi = np.maximum(logp_psi, -np.log(discriminators.n_codes))
    if use_raw_prob:
        out = (np.exp(logp_phi) - lam * np.exp(logp_psi)).sum(axis=-1)
    else:
        out = (logp_phi - lam * logp_psi).sum(axis=-1)
    return out if np.ndim(out) else float(out)


def safety_reward(action, prev_action, collision, over_force, config: Stage1Config):
    """-l1*|a|^2 - l2*|a - a_prev|^2 - l3*1[collision] - l4*1[over_force].

    Batched over a leading axis when the inputs carry one.
    """
    a = np.asarray(action, dtype=np.float64)
    ap = np.asarray(prev_action, dtype=np.float64)
    out = (
        -config.lambda1 * (a**2).sum(axis=-1)
        - config.lambda2 * ((a - ap) ** 2).sum(axis=-1)
        - config.lambda3 * np.asarray(collision, dtype=np.float64)
        - config.lambda4 * np.asarray(over_force, dtype=np.float64)
    )
    return out if np.ndim(out) else float(out)


def latent_reward(
    entity_states,
    codes,
    action,
    prev_action,
    collision,
    over_force,
    discriminators: DiscriminatorSet,
    config: Stage1Config,
):
    """Combined intrinsic reward: skill_reward + safety_reward."""
    return skill_reward(
        entity_states, codes, discriminators, config.lam, config.use_raw_prob, config.clip_psi_penalty
    ) + safety_reward(action, prev_action, collision, over_force, config)

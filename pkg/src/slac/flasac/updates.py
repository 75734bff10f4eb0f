"""FLA-SAC update rules.

Critic targets use hard per-head categorical samples from the current
policy; the relaxed Gumbel-softmax sample appears only in the actor loss,
where differentiability is needed.  The entropy bonus is split (alpha/m)
per head so the per-head targets remain valid Bellman backups whose sum
reproduces the monolithic SAC target exactly.
"""

from __future__ import annotations

import numpy as np

from slac.errors import TrainingError
from slac.flasac.config import Stage2Config
from slac.flasac.critic import FactoredCritic
from slac.flasac.policy import TaskPolicy
from slac.nets import one_hot
from slac.numerics import RngStream, categorical_entropy
from slac.numerics.distributions import categorical_entropy_backward, gumbel_softmax_backward, softmax
from slac.numerics.mlp import mlp_backward, mlp_forward


def critic_update(batch: dict, critic: FactoredCritic, policy, config: Stage2Config, rng: RngStream) -> list:
    """One regression step per head (both twins); returns per-head losses.

    batch keys: obs (B,D), codes (B,N), rewards (B,m), next_obs (B,D), done (B,).
    `policy` only needs sample_with_logprob(next_obs, rng).
    """
    obs = batch["obs"]
    rewards = batch["rewards"]
    done = batch["done"].astype(np.float64)
    bsz = obs.shape[0]
    z = one_hot(batch["codes"], critic.n_codes)

    next_codes, next_logp = policy.sample_with_logprob(batch["next_obs"], rng)
    next_z = one_hot(next_codes, critic.n_codes)
    alpha_share = config.alpha / critic.n_terms

    losses = []
    for i in range(critic.n_terms):
        q_next = critic.q_target(i, batch["next_obs"], next_z)
        y = rewards[:, i] + config.gamma * (1.0 - done) * (q_next - alpha_share * next_logp)
        if not np.all(np.isfinite(y)):
            raise TrainingError(f"non-finite critic target for head {i}")
        x = critic.head_input(i, obs, z)
        head_losses = []
        for net in critic.heads[i]:
            q, cache = mlp_forward(net.params, x)
            err = q[:, 0] - y
            head_losses.append(float((err**2).mean()))
            grads, _ = mlp_backward(net.params, cache, (2.0 * err / bsz)[:, None])
            net.apply_grads(grads, config.lr)
        losses.append(float(np.mean(head_losses)))
    critic.polyak(config.tau)
    return losses


def policy_update(batch: dict, critic: FactoredCritic, policy: TaskPolicy, config: Stage2Config, rng: RngStream) -> tuple:
    """Gumbel-softmax actor step; returns (loss, mean per-head entropy).

    loss = -E[ sum_i Q_i(o, B_i * z_hat) ] - alpha * sum_i H(pi_i(.|o)),
    with z_hat the relaxed per-head sample at the configured temperature.
    """
    obs = batch["obs"]
    bsz = obs.shape[0]
    logits, cache = policy.logits(obs)  # (B, N, K)

    gumbels = rng.gumbel(size=logits.shape)
    relaxed = softmax((logits + gumbels) / config.gumbel_tau)  # (B, N, K)
    z_hat = relaxed.reshape(bsz, policy.n_dims * policy.n_codes)

    q_sum = np.zeros(bsz)
    dz_hat = np.zeros_like(z_hat)
    for i in range(critic.n_terms):
        q, take_a, (ca, cb) = critic.q_online(i, obs, z_hat)
        q_sum += q
        ga = np.zeros((bsz, 1))
        ga[take_a, 0] = -1.0 / bsz
        gb = np.zeros((bsz, 1))
        gb[~take_a, 0] = -1.0 / bsz
        _, gin_a = mlp_backward(critic.heads[i][0].params, ca, ga)
        _, gin_b = mlp_backward(critic.heads[i][1].params, cb, gb)
        dz_hat += (gin_a[:, critic.obs_dim :] + gin_b[:, critic.obs_dim :]) * critic.masks[i]

    entropies = categorical_entropy(logits)  # (B, N)
    loss = float(-q_sum.mean() - config.alpha * entropies.sum(axis=-1).mean())
    if not np.isfinite(loss):
        raise TrainingError("non-finite actor loss")

    grad_logits = gumbel_softmax_backward(relaxed, config.gumbel_tau, dz_hat.reshape(logits.shape))
    grad_logits += -config.alpha / bsz * categorical_entropy_backward(logits)
    policy.apply_logit_grads(cache, grad_logits, config.lr)
    return loss, float(entropies.mean())

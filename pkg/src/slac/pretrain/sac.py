"""Squashed-Gaussian SAC with twin critics and Polyak targets.

Used for the latent action decoder (observation = decoder obs + skill
one-hot) and, unchanged, for the flat low-level baseline.  Gradients are
hand-chained through the numerics MLP core.
"""

from __future__ import annotations

import numpy as np

from slac.errors import TrainingError
from slac.nets import Network, polyak_update
from slac.numerics import RngStream
from slac.numerics.distributions import clamp_log_std, LOG_STD_MAX, LOG_STD_MIN, _log1m_tanh_sq
from slac.numerics.mlp import mlp_backward, mlp_forward


class DecoderSac:
    def __init__(
        self,
        obs_dim: int,
        act_dim: int,
        hidden,
        rng: RngStream,
        lr: float = 1e-4,
        gamma: float = 0.99,
        tau: float = 0.01,
        alpha: float = 0.0,
        zero_init_actor_columns: slice | None = None,
    ):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.lr = lr
        self.gamma = gamma
        self.tau = tau
        self.alpha = alpha
        self.actor = Network([obs_dim, *hidden, 2 * act_dim], rng.split("actor"))
        if zero_init_actor_columns is not None:
            # kill initial influence of these inputs (e.g. the skill one-hot):
            # couplings then only grow where reward gradients demand them
            self.actor.params.weights[0][zero_init_actor_columns, :] = 0.0
        self.critic1 = Network([obs_dim + act_dim, *hidden, 1], rng.split("critic1"))
        self.critic2 = Network([obs_dim + act_dim, *hidden, 1], rng.split("critic2"))
        self.target1 = self.critic1.clone_params()
        self.target2 = self.critic2.clone_params()

    def policy(self, obs: np.ndarray) -> tuple:
        out, cache = mlp_forward(self.actor.params, obs)
        mean = out[..., : self.act_dim]
        log_std = clamp_log_std(out[..., self.act_dim :])
        return mean, log_std, out, cache

    def _sample(self, obs: np.ndarray, rng: RngStream) -> tuple:
        mean, log_std, _, _ = self.policy(obs)
        noise = rng.normal(size=mean.shape)
        std = np.exp(log_std)
        u = mean + std * noise
        action = np.tanh(u)
        log_prob = (-0.5 * noise**2 - log_std - 0.5 * np.log(2 * np.pi) - _log1m_tanh_sq(u)).sum(axis=-1)
        return action, log_prob

    def act(self, obs: np.ndarray, rng: RngStream) -> np.ndarray:
        action, _ = self._sample(obs, rng)
        return action

    def act_mean(self, obs: np.ndarray) -> np.ndarray:
        mean, _, _, _ = self.policy(obs)
        return np.tanh(mean)

    def q_values(self, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
        x = np.concatenate([obs, action], axis=-1)
        q1, _ = mlp_forward(self.critic1.params, x)
        q2, _ = mlp_forward(self.critic2.params, x)
        return np.minimum(q1, q2)[..., 0]

    def update(
        self,
        obs: np.ndarray,
        action: np.ndarray,
        reward: np.ndarray,
        next_obs: np.ndarray,
        done: np.ndarray,
        rng: RngStream,
    ) -> dict:
        """One critic + actor update round on a batch; Polyak-averages targets."""
        batch = obs.shape[0]
        reward = np.asarray(reward, dtype=np.float64).reshape(batch)
        done = np.asarray(done, dtype=np.float64).reshape(batch)

        # --- critic targets
        next_action, next_logp = self._sample(next_obs, rng)
        xt = np.concatenate([next_obs, next_action], axis=-1)
        q1t, _ = mlp_forward(self.target1, xt)
        q2t, _ = mlp_forward(self.target2, xt)
        q_next = np.minimum(q1t, q2t)[:, 0] - self.alpha * next_logp
        y = reward + self.gamma * (1.0 - done) * q_next
        if not np.all(np.isfinite(y)):
            raise TrainingError("non-finite critic target")

        x = np.concatenate([obs, action], axis=-1)
        critic_losses = []
        for critic in (self.critic1, self.critic2):
            q, cache = mlp_forward(critic.params, x)
            err = q[:, 0] - y
            critic_losses.append(float((err**2).mean()))
            grads, _ = mlp_backward(critic.params, cache, (2.0 * err / batch)[:, None])
            critic.apply_grads(grads, self.lr)

        # --- actor: maximize min-Q of a reparameterized sample (alpha weights entropy)
        mean, log_std, raw_out, actor_cache = self.policy(obs)
        noise = rng.normal(size=mean.shape)
        std = np.exp(log_std)
        u = mean + std * noise
        a = np.tanh(u)
        xa = np.concatenate([obs, a], axis=-1)
        q1a, c1 = mlp_forward(self.critic1.params, xa)
        q2a, c2 = mlp_forward(self.critic2.params, xa)
        take1 = q1a[:, 0] <= q2a[:, 0]
        q_min = np.where(take1, q1a[:, 0], q2a[:, 0])
        logp = (-0.5 * noise**2 - log_std - 0.5 * np.log(2 * np.pi) - _log1m_tanh_sq(u)).sum(axis=-1)
        actor_loss = float((self.alpha * logp - q_min).mean())

        gq = np.zeros((batch, 1))
        gq[take1, 0] = -1.0 / batch
        _, gin1 = mlp_backward(self.critic1.params, c1, gq)
        gq2 = np.zeros((batch, 1))
        gq2[~take1, 0] = -1.0 / batch
        _, gin2 = mlp_backward(self.critic2.params, c2, gq2)
        da = gin1[:, self.obs_dim :] + gin2[:, self.obs_dim :]

        one_m_a2 = 1.0 - a**2
        dmean = da * one_m_a2
        dlog_std = da * one_m_a2 * std * noise
        if self.alpha != 0.0:
            dmean += self.alpha * 2.0 * a / batch
            dlog_std += self.alpha * (-1.0 + 2.0 * a * std * noise) / batch
        # clamped log_std coordinates pass no gradient
        raw_log_std = raw_out[..., self.act_dim :]
        in_bounds = (raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX)
        grad_out = np.concatenate([dmean, dlog_std * in_bounds], axis=-1)
        grads, _ = mlp_backward(self.actor.params, actor_cache, grad_out)
        self.actor.apply_grads(grads, self.lr)

        polyak_update(self.target1, self.critic1.params, self.tau)
        polyak_update(self.target2, self.critic2.params, self.tau)

        return {
            "critic_loss": float(np.mean(critic_losses)),
            "actor_loss": actor_loss,
            "q_mean": float(q_min.mean()),
            "entropy_est": float(-logp.mean()),
        }

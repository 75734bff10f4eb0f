"""From-scratch SAC on raw per-agent accelerations.

Stands in for direct real-world RL without the latent action space.  The
task reward is the summed composite reward, granted on the same
high-level boundary schedule as the latent runs, and step accounting is
shared so curves align on the ll_steps axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from slac.metrics import MetricsWriter
from slac.numerics import RngStream
from slac.numerics.checkpoint import save_checkpoint
from slac.pretrain.sac import DecoderSac
from slac.world import WorldConfig, reset, step, success, task_obs, task_obs_dim, task_reward, world_fingerprint


@dataclass
class BaselineConfig:
    lr: float = 3e-4
    batch_size: int = 256
    tau: float = 0.005
    hidden: list = field(default_factory=lambda: [256, 256])
    alpha: float = 0.1
    gamma: float = 0.99
    total_ll_steps: int = 100_000
    steps_per_skill: int = 50  # boundary schedule shared with the latent runs
    episode_len_hl: int = 10
    warmup_ll_steps: int = 2000
    update_every: int = 4
    eval_every_hl: int = 200
    eval_episodes: int = 10
    buffer_capacity: int = 150_000


class _FlatBuffer:
    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = capacity
        self.size = 0
        self._ptr = 0
        self.obs = np.zeros((capacity, obs_dim))
        self.action = np.zeros((capacity, act_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity, dtype=bool)

    def add(self, obs, action, reward, next_obs, done):
        i = self._ptr
        self.obs[i] = obs
        self.action[i] = action
        self.reward[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = done
        self._ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        idx = rng.integers(0, self.size, size=batch_size)
        return self.obs[idx], self.action[idx], self.reward[idx], self.next_obs[idx], self.done[idx]


def evaluate_baseline(sac: DecoderSac, world_cfg: WorldConfig, config: BaselineConfig, rng: RngStream) -> tuple:
    """Greedy rollouts on the boundary schedule; mirrors the latent evaluate()."""
    successes = 0
    returns = []
    safety_total = 0
    for ep in range(config.eval_episodes):
        ep_rng = rng.split(f"ep{ep}")
        state = reset(world_cfg, ep_rng)
        ep_return = 0.0
        ep_success = False
        for _ in range(config.episode_len_hl):
            for _ in range(config.steps_per_skill):
                obs = task_obs(state, world_cfg, ep_rng)
                action = sac.act_mean(obs)
                state, signals = step(state, action, world_cfg, ep_rng)
                if signals.collision or signals.over_force:
                    safety_total += 1
            ep_return += float(task_reward(state, world_cfg).sum())
            ep_success = ep_success or success(state, world_cfg)
        successes += bool(ep_success)
        returns.append(ep_return)
    return successes / config.eval_episodes, float(np.mean(returns)), safety_total


def load_baseline_policy(path, world_cfg: WorldConfig, config: BaselineConfig) -> DecoderSac:
    """Rebuild the actor from a baseline checkpoint for evaluation."""
    from slac.errors import CompatibilityError
    from slac.numerics.checkpoint import load_checkpoint

    arrays, metadata = load_checkpoint(path)
    if metadata.get("kind") != "baseline_policy":
        raise CompatibilityError(f"{path}: checkpoint is not a baseline policy")
    sac = DecoderSac(
        int(metadata["obs_dim"]), int(metadata["action_dim"]), metadata["hidden"], RngStream(0, "load")
    )
    i = 0
    while f"actor.w{i}" in arrays:
        sac.actor.params.weights[i] = arrays[f"actor.w{i}"].copy()
        sac.actor.params.biases[i] = arrays[f"actor.b{i}"].copy()
        i += 1
    return sac


def run_baseline_flat(config: BaselineConfig, world_cfg: WorldConfig, seed: int, outdir) -> Path:
    """Train the flat baseline; writes baseline.ckpt and metrics.jsonl."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    obs_dim = task_obs_dim(world_cfg)
    act_dim = world_cfg.action_dim

    root = RngStream(seed, "baseline")
    sac = DecoderSac(
        obs_dim,
        act_dim,
        config.hidden,
        root.split("sac"),
        lr=config.lr,
        gamma=config.gamma,
        tau=config.tau,
        alpha=config.alpha,
    )
    buffer = _FlatBuffer(config.buffer_capacity, obs_dim, act_dim)
    env_rng = root.split("env")
    act_rng = root.split("collect")
    warm_rng = root.split("warmup")
    batch_rng = root.split("batch")
    update_rng = root.split("update")
    eval_rng = root.split("eval")

    state = reset(world_cfg, env_rng)
    obs = task_obs(state, world_cfg, env_rng)
    episode_hl = 0
    hl_step = 0
    boundary_reward = np.zeros(world_cfg.n_agents)
    safety_in_skill = 0
    last_eval = None
    last_losses: dict = {}

    metrics = MetricsWriter(outdir / "metrics.jsonl", schema="baseline/1")
    try:
        for ll in range(1, config.total_ll_steps + 1):
            if ll <= config.warmup_ll_steps:
                action = warm_rng.uniform(-1.0, 1.0, size=act_dim)
            else:
                action = sac.act(obs, act_rng)
            state, signals = step(state, action, world_cfg, env_rng)
            if signals.collision or signals.over_force:
                safety_in_skill += 1
            at_boundary = ll % config.steps_per_skill == 0
            reward = 0.0
            if at_boundary:
                boundary_reward = task_reward(state, world_cfg)
                reward = float(boundary_reward.sum())
            hl_now = hl_step + 1 if at_boundary else hl_step
            done = at_boundary and (hl_now % config.episode_len_hl == 0)
            next_obs = task_obs(state, world_cfg, env_rng)
            buffer.add(obs, action, reward, next_obs, done)
            if done:
                state = reset(world_cfg, env_rng)
                next_obs = task_obs(state, world_cfg, env_rng)
            obs = next_obs

            if ll > config.warmup_ll_steps and ll % config.update_every == 0:
                b_obs, b_act, b_rew, b_next, b_done = buffer.sample(config.batch_size, batch_rng)
                last_losses = sac.update(b_obs, b_act, b_rew, b_next, b_done, update_rng)

            if at_boundary:
                hl_step = hl_now
                if config.eval_every_hl and hl_step % config.eval_every_hl == 0:
                    sr, ret, _ = evaluate_baseline(sac, world_cfg, config, eval_rng.split(f"at{hl_step}"))
                    last_eval = {"success_rate": sr, "mean_return": ret}
                metrics.write(
                    {
                        "hl_step": hl_step,
                        "ll_steps": ll,
                        "return_sum": float(boundary_reward.sum()),
                        "per_term_returns": boundary_reward.tolist(),
                        "success_eval": last_eval["success_rate"] if last_eval else None,
                        "safety_violations": safety_in_skill,
                        "policy_entropy": last_losses.get("entropy_est"),
                        "q_losses": [last_losses["critic_loss"]] if last_losses else [],
                        "actor_loss": last_losses.get("actor_loss"),
                    }
                )
                safety_in_skill = 0
    finally:
        metrics.close()

    ckpt = outdir / "baseline.ckpt"
    arrays = {}
    for i, (w, b) in enumerate(zip(sac.actor.params.weights, sac.actor.params.biases)):
        arrays[f"actor.w{i}"] = w
        arrays[f"actor.b{i}"] = b
    save_checkpoint(
        ckpt,
        arrays,
        {
            "kind": "baseline_policy",
            "obs_dim": obs_dim,
            "action_dim": act_dim,
            "world_fingerprint": world_fingerprint(world_cfg),
            "hidden": list(config.hidden),
        },
    )
    return ckpt

"""Stage-1 training loop: skills -> rollouts -> relabelled SAC updates.

A fleet of identical sim-variant worlds is stepped in lockstep.  Every
epoch each world gets a fresh uniform skill and runs it for
steps_per_skill ticks; after each tick the learner performs n_updates SAC
rounds on replayed transitions whose intrinsic reward is recomputed from
the stored raw states (so the evolving disentanglement discriminator
retroactively shapes old data).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from slac.errors import TrainingError, UsageError
from slac.metrics import MetricsWriter
from slac.nets import one_hot
from slac.numerics import RngStream
from slac.numerics.checkpoint import load_checkpoint, save_checkpoint
from slac.numerics.mlp import MlpParams, mlp_forward
from slac.numerics.distributions import clamp_log_std
from slac.pretrain.config import Stage1Config
from slac.pretrain.discriminators import DiscriminatorSet
from slac.pretrain.rewards import safety_reward, sample_skill, skill_reward
from slac.pretrain.sac import DecoderSac
from slac.world import WorldConfig, decoder_obs, decoder_obs_dim, quantize_region, reset, step, world_fingerprint

DECODER_OBS_LAYOUT = "positions|velocities|prev_action"


class SkillReplayBuffer:
    """Ring buffer of decoder transitions plus the raw states needed to relabel."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, n_agents: int, n_dims: int):
        self.capacity = capacity
        self.size = 0
        self._ptr = 0
        self.obs = np.zeros((capacity, obs_dim))
        self.action = np.zeros((capacity, act_dim))
        self.prev_action = np.zeros((capacity, act_dim))
        self.codes = np.zeros((capacity, n_dims), dtype=np.int64)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.raw_state = np.zeros((capacity, n_agents, 4))
        self.raw_next_state = np.zeros((capacity, n_agents, 4))
        self.collision = np.zeros(capacity, dtype=bool)
        self.over_force = np.zeros(capacity, dtype=bool)

    def add(self, obs, action, prev_action, codes, next_obs, raw_state, raw_next_state, collision, over_force):
        n = obs.shape[0]
        idx = (self._ptr + np.arange(n)) % self.capacity
        self.obs[idx] = obs
        self.action[idx] = action
        self.prev_action[idx] = prev_action
        self.codes[idx] = codes
        self.next_obs[idx] = next_obs
        self.raw_state[idx] = raw_state
        self.raw_next_state[idx] = raw_next_state
        self.collision[idx] = collision
        self.over_force[idx] = over_force
        self._ptr = int((self._ptr + n) % self.capacity)
        self.size = int(min(self.size + n, self.capacity))

    def sample(self, batch_size: int, rng: RngStream) -> np.ndarray:
        if self.size == 0:
            raise UsageError("cannot sample from an empty replay buffer")
        return rng.integers(0, self.size, size=batch_size)

    def sample_recent(self, batch_size: int, window: int, rng: RngStream) -> np.ndarray:
        """Indices drawn from the `window` most recently written slots."""
        if self.size == 0:
            raise UsageError("cannot sample from an empty replay buffer")
        span = min(window, self.size)
        offsets = rng.integers(1, span + 1, size=batch_size)
        return (self._ptr - offsets) % self.capacity


class DecoderPolicy:
    """Frozen decoder loaded from a checkpoint: pi_dec(a | o_dec, z)."""

    def __init__(self, params: MlpParams, n_dims: int, n_codes: int, metadata: dict):
        self.params = params
        self.n_dims = n_dims
        self.n_codes = n_codes
        self.metadata = metadata
        self.act_dim = int(metadata["action_dim"])
        self.obs_dim = int(metadata["obs_dim"])

    def _forward(self, obs: np.ndarray, codes: np.ndarray) -> tuple:
        z = one_hot(np.asarray(codes), self.n_codes)
        x = np.concatenate([obs, z], axis=-1)
        out, _ = mlp_forward(self.params, x)
        mean = out[..., : self.act_dim]
        log_std = clamp_log_std(out[..., self.act_dim :])
        return mean, log_std

    def mean_action(self, obs: np.ndarray, codes: np.ndarray) -> np.ndarray:
        mean, _ = self._forward(obs, codes)
        return np.tanh(mean)

    def sample_action(self, obs: np.ndarray, codes: np.ndarray, rng: RngStream) -> np.ndarray:
        mean, log_std = self._forward(obs, codes)
        return np.tanh(mean + np.exp(log_std) * rng.normal(size=mean.shape))


def _raw_state(state) -> np.ndarray:
    return np.concatenate([state.positions, state.velocities], axis=-1)


def save_decoder(path, sac: DecoderSac, n_dims: int, n_codes: int, world_cfg: WorldConfig, hidden) -> None:
    arrays = {}
    for i, (w, b) in enumerate(zip(sac.actor.params.weights, sac.actor.params.biases)):
        arrays[f"actor.w{i}"] = w
        arrays[f"actor.b{i}"] = b
    metadata = {
        "kind": "decoder",
        "n_dims": n_dims,
        "n_codes": n_codes,
        "obs_dim": decoder_obs_dim(world_cfg),
        "action_dim": world_cfg.action_dim,
        "obs_layout": DECODER_OBS_LAYOUT,
        "world_fingerprint": world_fingerprint(world_cfg),
        "hidden": list(hidden),
    }
    save_checkpoint(path, arrays, metadata)


def load_decoder(path) -> DecoderPolicy:
    arrays, metadata = load_checkpoint(path)
    if metadata.get("kind") != "decoder":
        from slac.errors import CompatibilityError

        raise CompatibilityError(f"{path}: checkpoint is not a decoder (kind={metadata.get('kind')!r})")
    params = MlpParams()
    i = 0
    while f"actor.w{i}" in arrays:
        params.weights.append(arrays[f"actor.w{i}"].copy())
        params.biases.append(arrays[f"actor.b{i}"].copy())
        i += 1
    return DecoderPolicy(params, int(metadata["n_dims"]), int(metadata["n_codes"]), metadata)


def train_decoder(
    config: Stage1Config,
    world_cfg: WorldConfig,
    seed: int,
    outdir,
) -> Path:
    """Run stage-1 pretraining; writes decoder.ckpt and metrics.jsonl in outdir."""
    config.validate()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n = world_cfg.n_agents
    n_dims = n  # one latent dimension per controllable entity
    obs_dim = decoder_obs_dim(world_cfg)
    act_dim = world_cfg.action_dim
    zk = n_dims * config.n_codes

    root = RngStream(seed, "stage1")
    sac = DecoderSac(
        obs_dim + zk,
        act_dim,
        config.hidden,
        root.split("sac"),
        lr=config.lr,
        gamma=config.gamma,
        tau=config.tau,
        alpha=config.alpha,
        zero_init_actor_columns=slice(obs_dim, obs_dim + zk) if config.zero_init_skill_columns else None,
    )
    disc = DiscriminatorSet(
        n, config.n_codes, config.p_hit, config.psi_hidden, config.psi_lr, root.split("disc")
    )
    buffer = SkillReplayBuffer(config.buffer_capacity, obs_dim, act_dim, n, n_dims)

    env_rngs = [root.split(f"env{i}") for i in range(config.n_envs)]
    skill_rng = root.split("skills")
    act_rng = root.split("collect")
    batch_rng = root.split("batch")
    update_rng = root.split("update")
    warm_rng = root.split("warmup")

    states = [reset(world_cfg, env_rngs[i]) for i in range(config.n_envs)]
    prev_actions = np.zeros((config.n_envs, act_dim))
    codes = sample_skill(skill_rng, n_dims, config.n_codes, size=config.n_envs)

    env_steps = 0
    window = {
        "skill_reward": [],
        "safety_reward": [],
        "collisions": [],
        "region_hits": [],
        "skill_end_states": [],
        "skill_end_codes": [],
        "critic_loss": [],
        "actor_loss": [],
        "psi_loss": [],
    }

    def batch_update() -> None:
        idx = buffer.sample(config.batch_size, batch_rng)
        raw_next = buffer.raw_next_state[idx]
        z = buffer.codes[idx]
        loss_psi = None
        for _ in range(config.psi_updates):
            if config.psi_recent_window > 0:
                pidx = buffer.sample_recent(config.batch_size, config.psi_recent_window, batch_rng)
            else:
                pidx = buffer.sample(config.batch_size, batch_rng)
            loss_psi = disc.psi_update(buffer.raw_next_state[pidx], buffer.codes[pidx])
        r = skill_reward(raw_next, z, disc, config.lam, config.use_raw_prob, config.clip_psi_penalty) + safety_reward(
            buffer.action[idx], buffer.prev_action[idx], buffer.collision[idx], buffer.over_force[idx], config
        )
        zoh = one_hot(z, config.n_codes)
        obs_z = np.concatenate([buffer.obs[idx], zoh], axis=-1)
        next_obs_z = np.concatenate([buffer.next_obs[idx], zoh], axis=-1)
        diag = sac.update(
            obs_z,
            buffer.action[idx],
            r * config.reward_scale,
            next_obs_z,
            np.zeros(len(idx)),
            update_rng,
        )
        if not np.isfinite(diag["critic_loss"]) or not np.isfinite(diag["actor_loss"]):
            dump = outdir / "nan_dump.json"
            dump.write_text(json.dumps({"env_steps": env_steps, "diag": diag}))
            raise TrainingError(f"non-finite stage-1 loss at env step {env_steps}; dump at {dump}")
        window["critic_loss"].append(diag["critic_loss"])
        window["actor_loss"].append(diag["actor_loss"])
        window["psi_loss"].append(loss_psi)

    metrics = MetricsWriter(outdir / "metrics.jsonl", schema="stage1/1")
    try:
        for epoch in range(1, config.epochs + 1):
            if config.reset_every_skills and (epoch - 1) % config.reset_every_skills == 0:
                states = [reset(world_cfg, env_rngs[i]) for i in range(config.n_envs)]
                prev_actions = np.zeros((config.n_envs, act_dim))
            codes = sample_skill(skill_rng, n_dims, config.n_codes, size=config.n_envs)
            zoh = one_hot(codes, config.n_codes)
            for j in range(config.steps_per_skill):
                obs = np.stack([decoder_obs(states[i], prev_actions[i], world_cfg) for i in range(config.n_envs)])
                if buffer.size < config.warmup_samples:
                    actions = warm_rng.uniform(-1.0, 1.0, size=(config.n_envs, act_dim))
                else:
                    actions = sac.act(np.concatenate([obs, zoh], axis=-1), act_rng)
                raw = np.stack([_raw_state(s) for s in states])
                next_states, collisions, overs = [], [], []
                for i in range(config.n_envs):
                    ns, sig = step(states[i], actions[i], world_cfg, env_rngs[i])
                    next_states.append(ns)
                    collisions.append(sig.collision)
                    overs.append(sig.over_force)
                raw_next = np.stack([_raw_state(s) for s in next_states])
                next_obs = np.stack(
                    [decoder_obs(next_states[i], actions[i], world_cfg) for i in range(config.n_envs)]
                )
                collisions = np.array(collisions)
                overs = np.array(overs)
                buffer.add(obs, actions, prev_actions, codes, next_obs, raw, raw_next, collisions, overs)
                env_steps += config.n_envs

                window["skill_reward"].append(
                    float(
                        np.mean(
                            skill_reward(
                                raw_next, codes, disc, config.lam, config.use_raw_prob, config.clip_psi_penalty
                            )
                        )
                    )
                )
                window["safety_reward"].append(
                    float(np.mean(safety_reward(actions, prev_actions, collisions, overs, config)))
                )
                window["collisions"].append(float(collisions.mean()))

                states = next_states
                prev_actions = actions
                if buffer.size >= config.warmup_samples:
                    for _ in range(config.n_updates):
                        batch_update()

            end_raw = np.stack([_raw_state(s) for s in states])
            hits = quantize_region(end_raw[..., :2]) == codes
            window["region_hits"].append(float(hits.mean()))
            window["skill_end_states"].append(end_raw)
            window["skill_end_codes"].append(codes.copy())

            if epoch % config.log_every_epochs == 0 or epoch == config.epochs:
                ends = np.concatenate(window["skill_end_states"])
                end_codes = np.concatenate(window["skill_end_codes"])
                metrics.write(
                    {
                        "epoch": epoch,
                        "env_steps": env_steps,
                        "skill_reward_mean": float(np.mean(window["skill_reward"])),
                        "safety_reward_mean": float(np.mean(window["safety_reward"])),
                        "region_match_acc": float(np.mean(window["region_hits"])),
                        "disentangle_probe_acc": disc.psi_accuracy(ends, end_codes),
                        "collision_rate": float(np.mean(window["collisions"])),
                        "critic_loss": float(np.mean(window["critic_loss"])) if window["critic_loss"] else None,
                        "actor_loss": float(np.mean(window["actor_loss"])) if window["actor_loss"] else None,
                        "psi_loss": float(np.mean(window["psi_loss"])) if window["psi_loss"] else None,
                    }
                )
                for key in window:
                    window[key] = []
    finally:
        metrics.close()

    ckpt = outdir / "decoder.ckpt"
    save_decoder(ckpt, sac, n_dims, config.n_codes, world_cfg, config.hidden)
    return ckpt

"""Stage-2 training: latent selection, 50-step decoder rollouts, FLA-SAC updates.

Single environment, single learner.  Each high-level step stores one
transition and is followed by `utd` update rounds, each on an independent
replay batch.  The decoder runs its mean action during rollouts;
exploration lives entirely in the latent selection.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from slac.errors import CompatibilityError, TrainingError
from slac.flasac.adjacency import validate_adjacency
from slac.flasac.config import Stage2Config
from slac.flasac.critic import FactoredCritic
from slac.flasac.policy import TaskPolicy, select_latent
from slac.flasac.updates import critic_update, policy_update
from slac.metrics import MetricsWriter
from slac.numerics import RngStream
from slac.numerics.checkpoint import load_checkpoint, save_checkpoint
from slac.numerics.mlp import MlpParams
from slac.pretrain.rewards import sample_skill
from slac.pretrain.trainer import DecoderPolicy
from slac.world import (
    WorldConfig,
    decoder_obs,
    reset,
    step,
    success,
    task_obs,
    task_obs_dim,
    task_reward,
    world_fingerprint,
)

TASK_OBS_LAYOUT = "positions|velocities|food|poison|type_flags|assigned_food"


def check_decoder_compat(decoder: DecoderPolicy, world_cfg: WorldConfig) -> None:
    """Refuse decoders trained for a structurally different world."""
    fp = world_fingerprint(world_cfg)
    have = decoder.metadata.get("world_fingerprint")
    if have != fp:
        raise CompatibilityError(
            f"decoder world fingerprint {have} does not match target world {fp}; "
            "the checkpoint was trained for a different world layout"
        )


def rollout_skill(
    state,
    prev_action: np.ndarray,
    world_cfg: WorldConfig,
    decoder: DecoderPolicy,
    codes: np.ndarray,
    steps_per_skill: int,
    rng: RngStream,
    dense_terms=None,
    on_step=None,
) -> tuple:
    """Run one latent action for steps_per_skill ticks with the decoder's mean action.

    Returns (next_state, last_action, r_sum, safety_count): the m sparse
    reward terms evaluated once on the boundary state, optional dense terms
    summed per tick, and the count of ticks with any safety flag raised.
    """
    r_sum = np.zeros(world_cfg.n_agents if dense_terms is None else len(dense_terms(state)))
    safety_count = 0
    action = prev_action
    for t in range(steps_per_skill):
        obs = decoder_obs(state, action, world_cfg, rng)
        action = decoder.mean_action(obs, codes)
        state, signals = step(state, action, world_cfg, rng)
        if signals.collision or signals.over_force:
            safety_count += 1
        if dense_terms is not None:
            r_sum = r_sum + dense_terms(state)
        if on_step is not None:
            on_step(t, state)
    if dense_terms is None:
        r_sum = task_reward(state, world_cfg)
    return state, action, r_sum, safety_count


class TaskReplayBuffer:
    def __init__(self, capacity: int, obs_dim: int, n_dims: int, n_terms: int):
        self.capacity = capacity
        self.size = 0
        self._ptr = 0
        self.obs = np.zeros((capacity, obs_dim))
        self.codes = np.zeros((capacity, n_dims), dtype=np.int64)
        self.rewards = np.zeros((capacity, n_terms))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity, dtype=bool)

    def add(self, obs, codes, rewards, next_obs, done) -> None:
        i = self._ptr
        self.obs[i] = obs
        self.codes[i] = codes
        self.rewards[i] = rewards
        self.next_obs[i] = next_obs
        self.done[i] = done
        self._ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: RngStream) -> dict:
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "obs": self.obs[idx],
            "codes": self.codes[idx],
            "rewards": self.rewards[idx],
            "next_obs": self.next_obs[idx],
            "done": self.done[idx],
        }


def evaluate(
    policy: TaskPolicy,
    decoder: DecoderPolicy,
    world_cfg: WorldConfig,
    n_episodes: int,
    rng: RngStream,
    config: Stage2Config,
    on_step=None,
) -> tuple:
    """Greedy rollouts; returns (success_rate, mean_return, total safety count).

    An episode counts as a success if the full task predicate holds at any
    high-level boundary.  on_step(episode, hl, ll, state) traces positions.
    """
    check_decoder_compat(decoder, world_cfg)
    successes = 0
    returns = []
    safety_total = 0
    for ep in range(n_episodes):
        ep_rng = rng.split(f"ep{ep}")
        state = reset(world_cfg, ep_rng)
        prev_action = np.zeros(world_cfg.action_dim)
        ep_return = 0.0
        ep_success = False
        for hl in range(config.episode_len_hl):
            obs = task_obs(state, world_cfg, ep_rng)
            codes = select_latent(policy, obs, "greedy")
            trace = None
            if on_step is not None:
                trace = lambda t, s, _ep=ep, _hl=hl: on_step(_ep, _hl, t, s)
            state, prev_action, r_sum, safety = rollout_skill(
                state, prev_action, world_cfg, decoder, codes, config.steps_per_skill, ep_rng, on_step=trace
            )
            ep_return += float(r_sum.sum())
            safety_total += safety
            ep_success = ep_success or success(state, world_cfg)
        successes += bool(ep_success)
        returns.append(ep_return)
    return successes / n_episodes, float(np.mean(returns)), safety_total


def save_task_policy(path, policy: TaskPolicy, adjacency: np.ndarray, metadata_extra: dict) -> None:
    arrays = {}
    for i, (w, b) in enumerate(zip(policy.net.params.weights, policy.net.params.biases)):
        arrays[f"policy.w{i}"] = w
        arrays[f"policy.b{i}"] = b
    metadata = {
        "kind": "task_policy",
        "n_dims": policy.n_dims,
        "n_codes": policy.n_codes,
        "obs_dim": policy.obs_dim,
        "obs_layout": TASK_OBS_LAYOUT,
        "adjacency": np.asarray(adjacency).astype(int).tolist(),
    }
    metadata.update(metadata_extra)
    save_checkpoint(path, arrays, metadata)


def load_task_policy(path) -> TaskPolicy:
    arrays, metadata = load_checkpoint(path)
    if metadata.get("kind") != "task_policy":
        raise CompatibilityError(f"{path}: checkpoint is not a task policy")
    params = MlpParams()
    i = 0
    while f"policy.w{i}" in arrays:
        params.weights.append(arrays[f"policy.w{i}"].copy())
        params.biases.append(arrays[f"policy.b{i}"].copy())
        i += 1
    hidden = [w.shape[1] for w in params.weights[:-1]]
    policy = TaskPolicy(
        int(metadata["obs_dim"]),
        int(metadata["n_dims"]),
        int(metadata["n_codes"]),
        hidden,
        RngStream(0, "load"),
    )
    policy.net.params = params
    policy.metadata = metadata
    return policy


def train_task(
    config: Stage2Config,
    decoder: DecoderPolicy,
    world_cfg: WorldConfig,
    seed: int,
    outdir,
    adjacency=None,
    no_decomp: bool = False,
) -> Path:
    """Run stage-2 downstream learning; writes policy.ckpt and metrics.jsonl."""
    config.validate()
    check_decoder_compat(decoder, world_cfg)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    n_dims = decoder.n_dims
    n_codes = decoder.n_codes
    obs_dim = task_obs_dim(world_cfg)
    if adjacency is None:
        adjacency = np.eye(world_cfg.n_agents)
    if no_decomp:
        # single monolithic head over the summed reward, seeing the full latent
        adjacency = np.ones((1, n_dims))
    adjacency = validate_adjacency(adjacency, adjacency.shape[0], n_dims)
    n_terms = adjacency.shape[0]

    root = RngStream(seed, "stage2")
    policy = TaskPolicy(obs_dim, n_dims, n_codes, config.hidden, root.split("policy"))
    critic = FactoredCritic(obs_dim, n_dims, n_codes, adjacency, config.hidden, root.split("critic"))
    buffer = TaskReplayBuffer(config.buffer_capacity, obs_dim, n_dims, n_terms)

    env_rng = root.split("env")
    skill_rng = root.split("warmup-skills")
    select_rng = root.split("select")
    batch_rng = root.split("batch")
    update_rng = root.split("update")
    eval_rng = root.split("eval")

    state = reset(world_cfg, env_rng)
    prev_action = np.zeros(world_cfg.action_dim)
    obs = task_obs(state, world_cfg, env_rng)
    episode_step = 0
    ll_steps = 0
    last_eval = None

    metrics = MetricsWriter(outdir / "metrics.jsonl", schema="stage2/1")
    try:
        for hl_step in range(1, config.total_hl_steps + 1):
            if hl_step <= config.warmup_hl_samples:
                codes = sample_skill(skill_rng, n_dims, n_codes)
            else:
                codes = select_latent(policy, obs, "stochastic", select_rng)
            state, prev_action, terms, safety = rollout_skill(
                state, prev_action, world_cfg, decoder, codes, config.steps_per_skill, env_rng
            )
            ll_steps += config.steps_per_skill
            rewards = np.array([terms.sum()]) if no_decomp else terms
            episode_step += 1
            done = episode_step >= config.episode_len_hl
            next_obs = task_obs(state, world_cfg, env_rng)
            buffer.add(obs, codes, rewards, next_obs, done)
            if done:
                state = reset(world_cfg, env_rng)
                prev_action = np.zeros(world_cfg.action_dim)
                next_obs = task_obs(state, world_cfg, env_rng)
                episode_step = 0
            obs = next_obs

            q_losses = []
            actor_loss = None
            if hl_step >= config.warmup_hl_samples:
                if not config.allow_hparam_override:
                    assert config.batch_size == 64 and config.utd == 10
                for _ in range(config.utd):
                    batch = buffer.sample(config.batch_size, batch_rng)
                    q_losses = critic_update(batch, critic, policy, config, update_rng)
                    actor_loss, _ = policy_update(batch, critic, policy, config, update_rng)

            if config.eval_every and hl_step % config.eval_every == 0:
                sr, ret, _ = evaluate(
                    policy, decoder, world_cfg, config.eval_episodes, eval_rng.split(f"at{hl_step}"), config
                )
                last_eval = {"success_rate": sr, "mean_return": ret}

            metrics.write(
                {
                    "hl_step": hl_step,
                    "ll_steps": ll_steps,
                    "return_sum": float(terms.sum()),
                    "per_term_returns": terms.tolist(),
                    "success_eval": last_eval["success_rate"] if last_eval else None,
                    "safety_violations": safety,
                    "policy_entropy": float(policy.entropy(obs).mean()),
                    "q_losses": q_losses,
                    "actor_loss": actor_loss,
                }
            )
    except TrainingError:
        dump = outdir / "nan_dump.json"
        dump.write_text(json.dumps({"hl_step": hl_step, "ll_steps": ll_steps}))
        raise
    finally:
        metrics.close()

    ckpt = outdir / "policy.ckpt"
    save_task_policy(
        ckpt,
        policy,
        adjacency,
        {"world_fingerprint": world_fingerprint(world_cfg), "decoder_fingerprint": decoder.metadata.get("world_fingerprint")},
    )
    return ckpt

"""Deterministic particle dynamics, observations and the food/poison task.

Positions live in [-arena_half_width, +arena_half_width]^2 and are clamped
there after every step; speeds are clamped to v_max.  The same code runs
both variants; noise terms are simply zero in the pretraining world.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from slac.errors import ConfigError
from slac.world.config import WorldConfig

RESET_MAX_ATTEMPTS = 10_000


@dataclass
class WorldState:
    positions: np.ndarray  # (n_agents, 2)
    velocities: np.ndarray  # (n_agents, 2)
    t: int = 0

    def copy(self) -> "WorldState":
        return WorldState(self.positions.copy(), self.velocities.copy(), self.t)


@dataclass
class SafetySignals:
    collision: bool
    over_force: bool
    collision_per_agent: np.ndarray  # (n_agents,) bool
    over_force_per_agent: np.ndarray  # (n_agents,) bool


def reset(config: WorldConfig, rng) -> WorldState:
    """Uniform agent placement, rejecting spawns on landmarks or other agents."""
    hw = config.arena_half_width
    landmarks = np.concatenate([config.food_positions, config.poison_positions], axis=0)
    # keep-out zone around landmarks, capped so oversized goal radii stay placeable
    clearance = min(config.goal_radius, 0.25 * hw)
    positions = np.empty((config.n_agents, 2))
    for i in range(config.n_agents):
        for attempt in range(RESET_MAX_ATTEMPTS):
            p = rng.uniform(-hw, hw, size=2)
            if landmarks.size and np.min(np.linalg.norm(landmarks - p, axis=1)) <= clearance:
                continue
            if i > 0 and np.min(np.linalg.norm(positions[:i] - p, axis=1)) <= 2 * config.agent_radius:
                continue
            positions[i] = p
            break
        else:
            raise ConfigError(
                f"could not place agent {i} in {RESET_MAX_ATTEMPTS} attempts; arena overcrowded"
            )
    return WorldState(positions=positions, velocities=np.zeros((config.n_agents, 2)), t=0)


def _safety_signals(state: WorldState, config: WorldConfig) -> SafetySignals:
    n = config.n_agents
    collide = np.zeros(n, dtype=bool)
    if n > 1:
        diff = state.positions[:, None, :] - state.positions[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        collide |= (dist < 2 * config.agent_radius).any(axis=1)
    if config.n_poison:
        # touching a poison landmark counts as a collision event
        pdist = np.linalg.norm(
            state.positions[:, None, :] - config.poison_positions[None, :, :], axis=-1
        )
        collide |= (pdist < config.goal_radius).any(axis=1)
    speed = np.linalg.norm(state.velocities, axis=-1)
    over = speed > config.force_threshold
    return SafetySignals(
        collision=bool(collide.any()),
        over_force=bool(over.any()),
        collision_per_agent=collide,
        over_force_per_agent=over,
    )


def step(state: WorldState, action: np.ndarray, config: WorldConfig, rng=None) -> tuple:
    """Advance one tick; returns (next_state, SafetySignals on the new state)."""
    a = np.clip(np.asarray(action, dtype=np.float64).reshape(config.n_agents, 2), -1.0, 1.0)
    if config.action_noise_std > 0.0 and rng is not None:
        a = a + config.action_noise_std * rng.normal(size=a.shape)
    v = (1.0 - config.damping) * state.velocities + config.accel_gain * a * config.dt
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    over = speed > config.v_max
    if over.any():
        v = np.where(over, v * (config.v_max / np.maximum(speed, 1e-300)), v)
    hw = config.arena_half_width
    p = np.clip(state.positions + v * config.dt, -hw, hw)
    new_state = WorldState(positions=p, velocities=v, t=state.t + 1)
    return new_state, _safety_signals(new_state, config)


def entity_state(state: WorldState, i: int) -> np.ndarray:
    """Agent i's slice [px, py, vx, vy]."""
    n = len(state.positions)
    if not 0 <= i < n:
        raise IndexError(f"agent index {i} out of range for {n} agents")
    return np.concatenate([state.positions[i], state.velocities[i]])


def complement_state(state: WorldState, i: int) -> np.ndarray:
    """All agents except i, concatenated in index order."""
    n = len(state.positions)
    if not 0 <= i < n:
        raise IndexError(f"agent index {i} out of range for {n} agents")
    others = [j for j in range(n) if j != i]
    if not others:
        return np.empty(0)
    return np.concatenate([np.concatenate([state.positions[j], state.velocities[j]]) for j in others])


def quantize_region(position: np.ndarray) -> np.ndarray:
    """Quadrant code of (..., 2) positions: 0:(x>=0,y>=0) 1:(x<0,y>=0) 2:(x<0,y<0) 3:(x>=0,y<0)."""
    position = np.asarray(position)
    x = position[..., 0]
    y = position[..., 1]
    region = np.where(
        x >= 0,
        np.where(y >= 0, 0, 3),
        np.where(y >= 0, 1, 2),
    )
    return region if region.ndim else region.item()


def decoder_obs_dim(config: WorldConfig) -> int:
    return 6 * config.n_agents


def decoder_obs(state: WorldState, prev_action: np.ndarray, config: WorldConfig, rng=None) -> np.ndarray:
    """[all positions, all velocities, previous action]; noisy only in the target variant."""
    prev_action = np.asarray(prev_action, dtype=np.float64).reshape(-1)
    if prev_action.size != config.action_dim:
        raise ConfigError(
            f"prev_action has length {prev_action.size}, expected {config.action_dim}"
        )
    obs = np.concatenate([state.positions.reshape(-1), state.velocities.reshape(-1), prev_action])
    if config.obs_noise_std > 0.0 and rng is not None:
        obs = obs + config.obs_noise_std * rng.normal(size=obs.shape)
    return obs


def task_obs_dim(config: WorldConfig) -> int:
    n, f, p = config.n_agents, config.n_food, config.n_poison
    return 4 * n + 2 * f + 2 * p + (f + p) + 2 * n


def task_obs(state: WorldState, config: WorldConfig, rng=None) -> np.ndarray:
    """Task-policy observation.

    Layout: positions (2n), velocities (2n), food positions (2f), poison
    positions (2p), landmark type flags (+1 food / -1 poison, f+p), and the
    per-agent assigned-food position (2n).  Additive Gaussian noise with
    obs_noise_std in the target variant.
    """
    flags = np.concatenate([np.ones(config.n_food), -np.ones(config.n_poison)])
    assigned = config.food_positions[config.food_assignment]
    obs = np.concatenate(
        [
            state.positions.reshape(-1),
            state.velocities.reshape(-1),
            config.food_positions.reshape(-1),
            config.poison_positions.reshape(-1),
            flags,
            assigned.reshape(-1),
        ]
    )
    if config.obs_noise_std > 0.0 and rng is not None:
        obs = obs + config.obs_noise_std * rng.normal(size=obs.shape)
    return obs


def _food_poison_hits(state: WorldState, config: WorldConfig) -> tuple:
    assigned = config.food_positions[config.food_assignment]
    on_food = np.linalg.norm(state.positions - assigned, axis=-1) < config.goal_radius
    if config.n_poison:
        pdist = np.linalg.norm(
            state.positions[:, None, :] - config.poison_positions[None, :, :], axis=-1
        )
        on_poison = (pdist < config.goal_radius).any(axis=1)
    else:
        on_poison = np.zeros(config.n_agents, dtype=bool)
    return on_food, on_poison


def task_reward(state: WorldState, config: WorldConfig) -> np.ndarray:
    """Per-agent terms: +1 on assigned food, -1 on any poison (poison wins), else 0."""
    on_food, on_poison = _food_poison_hits(state, config)
    return np.where(on_poison, -1.0, np.where(on_food, 1.0, 0.0))


def success(state: WorldState, config: WorldConfig) -> bool:
    """Every agent on its assigned food and none on poison."""
    on_food, on_poison = _food_poison_hits(state, config)
    return bool(on_food.all() and not on_poison.any())

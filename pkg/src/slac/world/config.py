"""World configuration and the food/poison landmark fixture.

Two presets share geometry and observation layout and differ only in
dynamics constants and noise: ``sim_world`` (pretraining) and
``real_world`` (perturbed target).  The fingerprint hashes the shared
structure only, so a decoder trained in the sim variant is valid for the
real variant of the same world.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from slac.errors import ConfigError

# quadrant centers indexed by region code (see sim.quantize_region)
_QUADRANT_CENTERS = np.array([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])


@dataclass
class WorldConfig:
    n_agents: int = 4
    arena_half_width: float = 1.0
    dt: float = 0.1
    damping: float = 0.25
    accel_gain: float = 1.0
    v_max: float = 1.0
    agent_radius: float = 0.05
    action_noise_std: float = 0.0
    obs_noise_std: float = 0.0
    goal_radius: float = 0.15
    force_threshold: float = 0.9  # 0.9 * v_max; over-speed stands in for over-force
    food_positions: np.ndarray = field(default_factory=lambda: _QUADRANT_CENTERS.copy())
    poison_positions: np.ndarray = field(
        default_factory=lambda: np.array([[0.0, 0.75], [0.0, -0.75], [0.75, 0.0], [-0.75, 0.0]])
    )
    food_assignment: np.ndarray = field(default_factory=lambda: np.arange(4))

    def __post_init__(self):
        self.food_positions = np.asarray(self.food_positions, dtype=np.float64).reshape(-1, 2)
        self.poison_positions = np.asarray(self.poison_positions, dtype=np.float64).reshape(-1, 2)
        self.food_assignment = np.asarray(self.food_assignment, dtype=np.int64).reshape(-1)
        self.validate()

    def validate(self) -> None:
        if self.n_agents < 1:
            raise ConfigError(f"n_agents must be >= 1, got {self.n_agents}")
        if not 0.0 <= self.damping < 1.0:
            raise ConfigError(f"damping must be in [0, 1), got {self.damping}")
        hw = self.arena_half_width
        for name, pts in (("food", self.food_positions), ("poison", self.poison_positions)):
            if pts.size and np.abs(pts).max() > hw:
                raise ConfigError(f"{name} landmarks must lie inside the arena")
        if len(self.food_positions) < self.n_agents:
            raise ConfigError(
                f"need at least one food landmark per agent "
                f"({len(self.food_positions)} food, {self.n_agents} agents)"
            )
        if len(self.food_assignment) != self.n_agents:
            raise ConfigError("food_assignment must have one entry per agent")
        if self.food_assignment.min() < 0 or self.food_assignment.max() >= len(self.food_positions):
            raise ConfigError("food_assignment indexes outside food_positions")

    @property
    def n_food(self) -> int:
        return len(self.food_positions)

    @property
    def n_poison(self) -> int:
        return len(self.poison_positions)

    @property
    def action_dim(self) -> int:
        return 2 * self.n_agents


def default_layout(n_agents: int) -> tuple:
    """Food/poison fixture: food at quadrant centers (ring-scaled past 4 agents),
    agent i assigned food i, poison at the four axis points (0,±0.75), (±0.75,0)."""
    scales = [1.0, 1.6, 0.6]
    food = []
    for i in range(max(n_agents, 1)):
        ring = i // 4
        if ring >= len(scales):
            raise ConfigError(f"default layout supports at most {4 * len(scales)} agents")
        food.append(_QUADRANT_CENTERS[i % 4] * scales[ring])
    food = np.array(food)
    poison = np.array([[0.0, 0.75], [0.0, -0.75], [0.75, 0.0], [-0.75, 0.0]])
    assignment = np.arange(n_agents)
    return food, poison, assignment


def sim_world(n_agents: int = 4, **overrides) -> WorldConfig:
    food, poison, assignment = default_layout(n_agents)
    cfg = WorldConfig(
        n_agents=n_agents,
        food_positions=food,
        poison_positions=poison,
        food_assignment=assignment,
    )
    return replace(cfg, **overrides) if overrides else cfg


def real_world(n_agents: int = 4, **overrides) -> WorldConfig:
    """Perturbed-dynamics target variant: heavier damping, weaker actuation, noise."""
    base = sim_world(n_agents)
    cfg = replace(
        base,
        damping=0.40,
        accel_gain=0.85,
        action_noise_std=0.02,
        obs_noise_std=0.01,
    )
    return replace(cfg, **overrides) if overrides else cfg


def world_fingerprint(config: WorldConfig) -> str:
    """Hash of the structure shared by sim/real variants.

    Covers geometry, landmark layout and observation layout; excludes
    dynamics constants and noise so the intended sim-to-real handoff
    passes the compatibility check while a different task/world fails it.
    """
    payload = {
        "n_agents": config.n_agents,
        "arena_half_width": config.arena_half_width,
        "agent_radius": config.agent_radius,
        "goal_radius": config.goal_radius,
        "food": np.round(config.food_positions, 12).tolist(),
        "poison": np.round(config.poison_positions, 12).tolist(),
        "assignment": config.food_assignment.tolist(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

"""Factored 2-D particle world: cheap pretraining variant and perturbed target variant."""

from slac.world.config import WorldConfig, sim_world, real_world, default_layout, world_fingerprint
from slac.world.sim import (
    WorldState,
    SafetySignals,
    reset,
    step,
    entity_state,
    complement_state,
    quantize_region,
    decoder_obs,
    decoder_obs_dim,
    task_obs,
    task_obs_dim,
    task_reward,
    success,
)

__all__ = [
    "WorldConfig",
    "sim_world",
    "real_world",
    "default_layout",
    "world_fingerprint",
    "WorldState",
    "SafetySignals",
    "reset",
    "step",
    "entity_state",
    "complement_state",
    "quantize_region",
    "decoder_obs",
    "decoder_obs_dim",
    "task_obs",
    "task_obs_dim",
    "task_reward",
    "success",
]

"""Resolution of parsed config files into fully materialized experiment configs."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from slac.baseline import BaselineConfig
from slac.errors import ConfigError
from slac.flasac.adjacency import full_adjacency, identity_adjacency, validate_adjacency
from slac.flasac.config import Stage2Config
from slac.pretrain.config import Stage1Config
from slac.world import WorldConfig, real_world, sim_world

STAGES = ("stage1", "stage2", "baseline", "eval", "oracle")

_WORLD_KEYS = {
    "n_agents": int,
    "dt": float,
    "damping": float,
    "accel_gain": float,
    "v_max": float,
    "agent_radius": float,
    "action_noise_std": float,
    "obs_noise_std": float,
    "goal_radius": float,
    "force_threshold": float,
}


@dataclass
class ExperimentConfig:
    stage: str
    seed: int
    world_variant: str
    world_cfg: WorldConfig
    stage1: Stage1Config | None = None
    stage2: Stage2Config | None = None
    baseline: BaselineConfig | None = None
    decoder_path: str | None = None
    policy_path: str | None = None
    adjacency: np.ndarray | None = None
    no_disentangle: bool = False
    no_decomp: bool = False
    no_temporal: bool = False
    eval_episodes: int = 10
    dump_trajectory: bool = False
    oracle_mdps: int = 10
    oracle_critic_iters: int = 2500
    outdir: str | None = None
    resolved: dict = field(default_factory=dict)


def _apply_section(cfg, flat: dict, section: str, skip=()):
    """Overlay section keys onto a dataclass, with type coercion and key checking."""
    names = {f.name: f for f in dataclasses.fields(cfg)}
    prefix = section + "."
    for key, value in flat.items():
        if not key.startswith(prefix):
            continue
        name = key[len(prefix) :]
        if name in skip:
            continue
        if name not in names:
            raise ConfigError(f"unknown key {key!r} (no field {name!r} in {type(cfg).__name__})")
        f = names[name]
        try:
            if f.type in ("int", int):
                value = int(value)
            elif f.type in ("float", float):
                value = float(value)
            elif f.type in ("bool", bool):
                if not isinstance(value, bool):
                    raise ValueError("expected true/false")
            elif f.type in ("list", list):
                value = [int(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
        setattr(cfg, name, value)
    return cfg


def _section_snapshot(cfg, section: str) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, list):
            value = list(value)
        out[f"{section}.{f.name}"] = value
    return out


def _build_world(flat: dict) -> tuple:
    variant = flat.get("world.variant", "sim")
    if variant not in ("sim", "real"):
        raise ConfigError(f"world.variant must be sim or real, got {variant!r}")
    n_agents = int(flat.get("world.n_agents", 4))
    maker = sim_world if variant == "sim" else real_world
    overrides = {}
    for key, value in flat.items():
        if not key.startswith("world."):
            continue
        name = key[len("world.") :]
        if name in ("variant", "n_agents"):
            continue
        if name not in _WORLD_KEYS:
            raise ConfigError(f"unknown world key {key!r}")
        overrides[name] = _WORLD_KEYS[name](value)
    cfg = maker(n_agents, **overrides)
    snapshot = {"world.variant": variant, "world.n_agents": n_agents}
    for name in _WORLD_KEYS:
        snapshot[f"world.{name}"] = getattr(cfg, name)
    return cfg, snapshot


def _build_adjacency(flat: dict, n_terms: int, n_dims: int):
    mode = flat.get("adjacency.mode", "identity")
    rows = sorted(k for k in flat if k.startswith("adjacency.row"))
    if rows:
        if len(rows) != n_terms:
            raise ConfigError(f"adjacency needs {n_terms} rows (one per reward term), got {len(rows)}")
        try:
            matrix = [flat[f"adjacency.row{i}"] for i in range(len(rows))]
        except KeyError as exc:
            raise ConfigError(f"adjacency rows must be numbered row0..rowN; missing {exc}") from exc
        return validate_adjacency(np.array(matrix), n_terms, n_dims)
    if mode == "identity":
        if n_terms != n_dims:
            raise ConfigError("identity adjacency needs n_terms == n_dims")
        return identity_adjacency(n_dims)
    if mode == "full":
        return full_adjacency(n_terms, n_dims)
    raise ConfigError(f"adjacency.mode must be identity or full, got {mode!r}")


def resolve_experiment(flat: dict, stage: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Materialize every default; returns the config plus its flat snapshot."""
    cfg_stage = flat.get("stage")
    if stage is not None and cfg_stage is not None and stage != cfg_stage:
        raise ConfigError(f"CLI stage {stage!r} conflicts with config stage {cfg_stage!r}")
    stage = stage or cfg_stage
    if stage not in STAGES:
        raise ConfigError(f"stage must be one of {STAGES}, got {stage!r}")

    if seed is None:
        seed = flat.get("seed")
    if seed is None:
        raise ConfigError("seed is required (config key 'seed', --seed, or SLAC_SEED)")
    seed = int(seed)

    world_cfg, world_snapshot = _build_world(flat)
    exp = ExperimentConfig(stage=stage, seed=seed, world_variant=world_snapshot["world.variant"], world_cfg=world_cfg)
    exp.no_disentangle = bool(flat.get("no_disentangle", False))
    exp.no_decomp = bool(flat.get("no_decomp", False))
    exp.no_temporal = bool(flat.get("no_temporal", False))
    exp.outdir = flat.get("outdir")

    snapshot = {
        "stage": stage,
        "seed": seed,
        "no_disentangle": exp.no_disentangle,
        "no_decomp": exp.no_decomp,
        "no_temporal": exp.no_temporal,
    }
    snapshot.update(world_snapshot)

    if stage == "stage1":
        s1 = _apply_section(Stage1Config(), flat, "stage1")
        if exp.no_disentangle:
            s1.lam = 0.0
        s1.validate()
        exp.stage1 = s1
        snapshot.update(_section_snapshot(s1, "stage1"))
    elif stage == "stage2":
        s2 = _apply_section(Stage2Config(), flat, "stage2", skip=("decoder",))
        if exp.no_temporal:
            s2.steps_per_skill = 1
        s2.validate()
        exp.stage2 = s2
        exp.decoder_path = flat.get("stage2.decoder")
        if not exp.decoder_path:
            raise ConfigError("stage2 requires stage2.decoder = <path to decoder checkpoint>")
        n_dims = world_cfg.n_agents
        if exp.no_disentangle:
            exp.adjacency = full_adjacency(world_cfg.n_agents, n_dims)
        else:
            exp.adjacency = _build_adjacency(flat, world_cfg.n_agents, n_dims)
        snapshot.update(_section_snapshot(s2, "stage2"))
        snapshot["stage2.decoder"] = exp.decoder_path
        for i, row in enumerate(np.asarray(exp.adjacency, dtype=int).tolist()):
            snapshot[f"adjacency.row{i}"] = row
    elif stage == "baseline":
        bl = _apply_section(BaselineConfig(), flat, "baseline")
        exp.baseline = bl
        snapshot.update(_section_snapshot(bl, "baseline"))
    elif stage == "eval":
        exp.policy_path = flat.get("eval.policy")
        exp.decoder_path = flat.get("eval.decoder")
        if not exp.policy_path or not exp.decoder_path:
            raise ConfigError("eval requires eval.policy and eval.decoder checkpoint paths")
        exp.eval_episodes = int(flat.get("eval.n_episodes", 10))
        exp.dump_trajectory = bool(flat.get("eval.dump_trajectory", False))
        s2 = _apply_section(Stage2Config(), flat, "stage2", skip=("decoder",))
        if exp.no_temporal:
            s2.steps_per_skill = 1
        exp.stage2 = s2
        snapshot.update(_section_snapshot(s2, "stage2"))
        snapshot["eval.policy"] = exp.policy_path
        snapshot["eval.decoder"] = exp.decoder_path
        snapshot["eval.n_episodes"] = exp.eval_episodes
        snapshot["eval.dump_trajectory"] = exp.dump_trajectory
    elif stage == "oracle":
        exp.oracle_mdps = int(flat.get("oracle.n_mdps", 10))
        exp.oracle_critic_iters = int(flat.get("oracle.critic_iters", 2500))
        snapshot["oracle.n_mdps"] = exp.oracle_mdps
        snapshot["oracle.critic_iters"] = exp.oracle_critic_iters

    exp.resolved = snapshot
    return exp

"""Run dispatch: config file -> resolved snapshot -> stage execution -> artifacts."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

from slac.baseline import run_baseline_flat
from slac.errors import ConfigError
from slac.flasac.trainer import evaluate, load_task_policy, train_task
from slac.harness.configfile import emit_config, parse_config_file
from slac.harness.experiment import ExperimentConfig, resolve_experiment
from slac.harness.oracle import run_oracle_suite
from slac.numerics import RngStream
from slac.pretrain.trainer import load_decoder, train_decoder

SNAPSHOT_NAME = "resolved_config.cfg"


def _pick(cli_value, env_name, cfg_value):
    if cli_value is not None:
        return cli_value
    env = os.environ.get(env_name)
    if env is not None:
        return env
    return cfg_value


def run(
    config_path,
    stage: str | None = None,
    seed: int | None = None,
    outdir=None,
    no_disentangle: bool = False,
    no_decomp: bool = False,
    no_temporal: bool = False,
) -> Path:
    """Execute one experiment; returns the output directory with its artifacts."""
    flat = parse_config_file(config_path)
    for name, on in (
        ("no_disentangle", no_disentangle),
        ("no_decomp", no_decomp),
        ("no_temporal", no_temporal),
    ):
        if on:
            flat[name] = True

    seed = _pick(seed, "SLAC_SEED", flat.get("seed"))
    if seed is not None:
        flat["seed"] = int(seed)
    exp = resolve_experiment(flat, stage=stage)

    outdir = _pick(outdir, "SLAC_OUTDIR", exp.outdir)
    if outdir is None:
        raise ConfigError("output directory required ('outdir' key, --outdir, or SLAC_OUTDIR)")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / SNAPSHOT_NAME).write_text(emit_config(exp.resolved))

    if exp.stage == "stage1":
        train_decoder(exp.stage1, exp.world_cfg, exp.seed, outdir)
    elif exp.stage == "stage2":
        decoder = _load_decoder_checked(exp)
        train_task(
            exp.stage2,
            decoder,
            exp.world_cfg,
            exp.seed,
            outdir,
            adjacency=exp.adjacency,
            no_decomp=exp.no_decomp,
        )
    elif exp.stage == "baseline":
        run_baseline_flat(exp.baseline, exp.world_cfg, exp.seed, outdir)
    elif exp.stage == "eval":
        _run_eval(exp, outdir)
    elif exp.stage == "oracle":
        results = run_oracle_suite(
            exp.seed, n_mdps=exp.oracle_mdps, critic_iters=exp.oracle_critic_iters
        )
        (outdir / "oracle.json").write_text(json.dumps(results, indent=2, sort_keys=True))
    return outdir


def _load_decoder_checked(exp: ExperimentConfig):
    path = Path(exp.decoder_path)
    if not path.exists():
        raise ConfigError(f"decoder checkpoint {path} does not exist")
    return load_decoder(path)


def _run_eval(exp: ExperimentConfig, outdir: Path) -> None:
    decoder = _load_decoder_checked(exp)
    policy_path = Path(exp.policy_path)
    if not policy_path.exists():
        raise ConfigError(f"policy checkpoint {policy_path} does not exist")
    policy = load_task_policy(policy_path)
    rng = RngStream(exp.seed, "eval")

    rows = []
    on_step = None
    if exp.dump_trajectory:
        def on_step(ep, hl, ll, state):
            for agent, (x, y) in enumerate(state.positions):
                rows.append((ep, hl, ll, agent, x, y))

    sr, ret, safety = evaluate(
        policy, decoder, exp.world_cfg, exp.eval_episodes, rng, exp.stage2, on_step=on_step
    )
    (outdir / "eval.json").write_text(
        json.dumps(
            {
                "success_rate": sr,
                "mean_return": ret,
                "safety_violations": safety,
                "n_episodes": exp.eval_episodes,
            },
            indent=2,
            sort_keys=True,
        )
    )
    if exp.dump_trajectory:
        with open(outdir / "trajectory.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode", "hl_step", "ll_step", "agent", "x", "y"])
            writer.writerows(rows)

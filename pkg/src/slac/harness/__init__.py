"""Experiment orchestration: config files, run dispatch, oracles, CLI."""

from slac.harness.configfile import parse_config_file, parse_config_text, emit_config
from slac.harness.experiment import ExperimentConfig, resolve_experiment
from slac.harness.mdp import TabularMdp, random_mdp, value_iteration
from slac.harness.runner import run

__all__ = [
    "parse_config_file",
    "parse_config_text",
    "emit_config",
    "ExperimentConfig",
    "resolve_experiment",
    "TabularMdp",
    "random_mdp",
    "value_iteration",
    "run",
]

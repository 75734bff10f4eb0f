"""Flat low-level SAC baseline (from-scratch learning in the raw action space)."""

from slac.baseline.flat_sac import BaselineConfig, run_baseline_flat, evaluate_baseline, load_baseline_policy

__all__ = ["BaselineConfig", "run_baseline_flat", "evaluate_baseline", "load_baseline_policy"]

"""Metrics post-processing shared by the acceptance checks."""

from __future__ import annotations

import numpy as np

from slac.metrics import read_metrics


def ema(values, factor: float) -> np.ndarray:
    """Exponential smoothing, s_t = factor*s_{t-1} + (1-factor)*x_t; factor 0 is identity."""
    values = np.asarray(values, dtype=np.float64)
    if factor <= 0.0:
        return values.copy()
    out = np.empty_like(values)
    acc = values[0]
    for i, x in enumerate(values):
        acc = factor * acc + (1.0 - factor) * x
        out[i] = acc
    return out


def return_series(path, smooth: float = 0.9) -> tuple:
    """(ll_steps, smoothed per-boundary return_sum) from a stage2/baseline log."""
    records = [r for r in read_metrics(path) if "return_sum" in r]
    steps = np.array([r["ll_steps"] for r in records])
    rets = np.array([r["return_sum"] for r in records], dtype=np.float64)
    return steps, ema(rets, smooth)


def steps_to_threshold(path, threshold: float, smooth: float = 0.9):
    """First ll_steps where the smoothed return reaches threshold; None if never."""
    steps, smoothed = return_series(path, smooth)
    hit = np.nonzero(smoothed >= threshold)[0]
    return int(steps[hit[0]]) if hit.size else None


def final_eval_success(path):
    """Last non-null success_eval entry of a run log."""
    values = [r["success_eval"] for r in read_metrics(path) if r.get("success_eval") is not None]
    return values[-1] if values else None


def safety_per_1k_steps(path) -> float:
    """Total logged safety violations per 1000 low-level steps."""
    records = [r for r in read_metrics(path) if "safety_violations" in r]
    total = sum(r["safety_violations"] for r in records)
    last = max(r["ll_steps"] for r in records)
    return 1000.0 * total / last


def max_smoothed_return(path, smooth: float = 0.9) -> float:
    _, smoothed = return_series(path, smooth)
    return float(smoothed.max())

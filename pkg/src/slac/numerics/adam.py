"""Adam optimizer over flat lists of parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from slac.errors import ConfigError, TrainingError


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the parameter shapes."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: list, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            step=0,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(state: AdamState, params: list, grads: list, lr: float) -> tuple:
    """One bias-corrected Adam update, in place; returns (params, state)."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ConfigError(
            f"parameter/gradient/state length mismatch: {len(params)}/{len(grads)}/{len(state.m)}"
        )
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ConfigError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingError("non-finite gradient passed to adam_step")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state

"""Post-hoc disentanglement probes.

Rolls the frozen decoder on fresh uniform skills, snapshots (entity
states, codes) at skill end, then trains fresh classifiers predicting the
code of dimension i from the paired entity state s^i and, separately,
from the complement s^{not i}.  High self-accuracy plus near-chance
complement accuracy is the operational reading of a disentangled space.
"""

from __future__ import annotations

import numpy as np

from slac.nets import Network
from slac.numerics import RngStream, log_softmax, softmax
from slac.numerics.mlp import mlp_backward, mlp_forward
from slac.pretrain.rewards import sample_skill
from slac.pretrain.trainer import DecoderPolicy, _raw_state
from slac.world import WorldConfig, decoder_obs, reset, step


def collect_skill_end_states(
    decoder: DecoderPolicy,
    world_cfg: WorldConfig,
    n_skills: int,
    steps_per_skill: int,
    rng: RngStream,
    reset_every: int = 1,
) -> tuple:
    """Deterministic (mean-action) rollouts; returns (states (M, n, 4), codes (M, n))."""
    env_rng = rng.split("env")
    skill_rng = rng.split("skills")
    states_out, codes_out = [], []
    state = reset(world_cfg, env_rng)
    prev_action = np.zeros(world_cfg.action_dim)
    for k in range(n_skills):
        if reset_every and k % reset_every == 0:
            state = reset(world_cfg, env_rng)
            prev_action = np.zeros(world_cfg.action_dim)
        z = sample_skill(skill_rng, decoder.n_dims, decoder.n_codes)
        for _ in range(steps_per_skill):
            obs = decoder_obs(state, prev_action, world_cfg)
            action = decoder.mean_action(obs, z)
            state, _ = step(state, action, world_cfg, env_rng)
            prev_action = action
        states_out.append(_raw_state(state))
        codes_out.append(z)
    return np.stack(states_out), np.stack(codes_out)


def _train_classifier(x: np.ndarray, y: np.ndarray, n_codes: int, rng: RngStream, steps: int = 600, lr: float = 3e-3) -> float:
    """Small MLP classifier; returns held-out accuracy (20% split)."""
    m = len(x)
    perm = rng.choice(m, size=m, replace=False)
    cut = max(1, int(0.8 * m))
    tr, te = perm[:cut], perm[cut:]
    net = Network([x.shape[1], 64, n_codes], rng.split("net"))
    for _ in range(steps):
        logits, cache = mlp_forward(net.params, x[tr])
        grad = softmax(logits)
        np.subtract.at(grad, (np.arange(len(tr)), y[tr]), 1.0)
        grads, _ = mlp_backward(net.params, cache, grad / len(tr))
        net.apply_grads(grads, lr)
    logits, _ = mlp_forward(net.params, x[te])
    return float(np.mean(np.argmax(logits, axis=-1) == y[te]))


def probe_disentanglement(states: np.ndarray, codes: np.ndarray, rng: RngStream) -> dict:
    """Per-dimension held-out probe accuracies from s^i and from s^{not i}."""
    n_dims = codes.shape[1]
    n_codes = int(codes.max()) + 1
    self_acc, other_acc = [], []
    for i in range(n_dims):
        xi = states[:, i, :]
        self_acc.append(_train_classifier(xi, codes[:, i], n_codes, rng.split(f"self{i}")))
        others = [j for j in range(n_dims) if j != i]
        if others:
            xo = states[:, others, :].reshape(len(states), -1)
            other_acc.append(_train_classifier(xo, codes[:, i], n_codes, rng.split(f"other{i}")))
        else:
            other_acc.append(1.0 / n_codes)
    return {
        "self_acc": self_acc,
        "other_acc": other_acc,
        "self_median": float(np.median(self_acc)),
        "other_median": float(np.median(other_acc)),
    }

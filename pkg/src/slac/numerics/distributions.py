"""Categorical and squashed-Gaussian primitives with manual gradients.

All functions broadcast over leading axes; the category / action axis is
the last one.
"""

from __future__ import annotations

import numpy as np

from slac.errors import ConfigError

LOG_STD_MIN = -10.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax_backward(y: np.ndarray, grad_y: np.ndarray) -> np.ndarray:
    """Given y = softmax(u) and dL/dy, return dL/du."""
    dot = (grad_y * y).sum(axis=-1, keepdims=True)
    return y * (grad_y - dot)


def categorical_entropy(logits: np.ndarray) -> np.ndarray:
    """H = -sum p log p with p = softmax(logits)."""
    logp = log_softmax(logits)
    p = np.exp(logp)
    return -(p * logp).sum(axis=-1)


def categorical_entropy_backward(logits: np.ndarray) -> np.ndarray:
    """dH/dlogits, same shape as logits."""
    logp = log_softmax(logits)
    p = np.exp(logp)
    h = -(p * logp).sum(axis=-1, keepdims=True)
    return -p * (logp + h)


def gumbel_softmax(logits: np.ndarray, tau: float, rng) -> np.ndarray:
    """Relaxed one-hot sample: softmax((logits + Gumbel noise) / tau).

    Non-straight-through; the output is a probability vector that is
    differentiable w.r.t. logits (see gumbel_softmax_backward).
    """
    logits = np.asarray(logits, dtype=np.float64)
    if tau <= 0.0:
        raise ConfigError(f"gumbel_softmax temperature must be positive, got {tau}")
    if logits.shape[-1] < 2:
        raise ConfigError("gumbel_softmax needs at least 2 categories")
    g = rng.gumbel(size=logits.shape)
    return softmax((logits + g) / tau)


def gumbel_softmax_backward(y: np.ndarray, tau: float, grad_y: np.ndarray) -> np.ndarray:
    """dL/dlogits for y = gumbel_softmax(logits, tau) with the noise held fixed."""
    return softmax_backward(y, grad_y) / tau


def clamp_log_std(log_std: np.ndarray) -> np.ndarray:
    return np.clip(log_std, LOG_STD_MIN, LOG_STD_MAX)


def _log1m_tanh_sq(u: np.ndarray) -> np.ndarray:
    # log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u)), stable for large |u|
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


def squashed_gaussian_sample(mean: np.ndarray, log_std: np.ndarray, rng) -> tuple:
    """Sample a tanh-squashed Gaussian action; returns (action, log_prob, noise).

    log_std is clamped into [-10, 2] before use.  log_prob sums over the
    action axis and includes the tanh change-of-variables correction.
    The standard-normal noise is returned for reparameterized gradients.
    """
    mean = np.asarray(mean, dtype=np.float64)
    log_std = clamp_log_std(np.asarray(log_std, dtype=np.float64))
    noise = rng.normal(size=mean.shape)
    std = np.exp(log_std)
    u = mean + std * noise
    action = np.tanh(u)
    log_prob = (-0.5 * noise**2 - log_std - _HALF_LOG_2PI - _log1m_tanh_sq(u)).sum(axis=-1)
    return action, log_prob, noise


def squashed_gaussian_log_prob(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> np.ndarray:
    """Log density of an action in (-1, 1)^d under the squashed Gaussian."""
    mean = np.asarray(mean, dtype=np.float64)
    log_std = clamp_log_std(np.asarray(log_std, dtype=np.float64))
    action = np.asarray(action, dtype=np.float64)
    u = np.arctanh(np.clip(action, -1.0 + 1e-12, 1.0 - 1e-12))
    std = np.exp(log_std)
    z = (u - mean) / std
    return (-0.5 * z**2 - log_std - _HALF_LOG_2PI - _log1m_tanh_sq(u)).sum(axis=-1)

"""Reward-term / latent-dimension adjacency matrix."""

from __future__ import annotations

import numpy as np

from slac.errors import ConfigError


def validate_adjacency(matrix, n_terms: int, n_dims: int) -> np.ndarray:
    """Check a user-supplied 0/1 matrix of shape (n_terms, n_dims); rows must be nonzero."""
    b = np.asarray(matrix)
    if b.shape != (n_terms, n_dims):
        raise ConfigError(f"adjacency must be shape ({n_terms}, {n_dims}), got {b.shape}")
    if not np.isin(b, (0, 1)).all():
        raise ConfigError("adjacency entries must be 0 or 1")
    if (b.sum(axis=1) == 0).any():
        raise ConfigError("every adjacency row must reference at least one latent dimension")
    return b.astype(np.float64)


def identity_adjacency(n: int) -> np.ndarray:
    return np.eye(n)


def full_adjacency(n_terms: int, n_dims: int) -> np.ndarray:
    return np.ones((n_terms, n_dims))


def expand_mask(adjacency: np.ndarray, n_codes: int) -> np.ndarray:
    """(m, N) row mask -> (m, N*K) mask over the concatenated one-hot blocks."""
    return np.repeat(np.asarray(adjacency, dtype=np.float64), n_codes, axis=1)

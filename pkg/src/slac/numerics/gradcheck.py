"""Central finite-difference gradients, used as the test oracle."""

from __future__ import annotations

import numpy as np


def finite_difference_gradient(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """(f(x + eps*e_i) - f(x - eps*e_i)) / (2*eps) per coordinate."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    xf = x.reshape(-1)
    for i in range(xf.size):
        orig = xf[i]
        xf[i] = orig + eps
        hi = f(x)
        xf[i] = orig - eps
        lo = f(x)
        xf[i] = orig
        flat[i] = (hi - lo) / (2.0 * eps)
    return grad

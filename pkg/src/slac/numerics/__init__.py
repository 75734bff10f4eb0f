"""Dense float64 compute core: hand-rolled MLP autodiff, Adam, distributions.

Everything here is deterministic given an RngStream.  Parameters are plain
C-order float64 numpy arrays; 2-D weights are stored (fan_in, fan_out).
"""

from slac.numerics.rng import RngStream
from slac.numerics.mlp import MlpParams, init_mlp, mlp_forward, mlp_backward
from slac.numerics.adam import AdamState, adam_step
from slac.numerics.distributions import (
    softmax,
    log_softmax,
    categorical_entropy,
    gumbel_softmax,
    squashed_gaussian_sample,
    squashed_gaussian_log_prob,
)
from slac.numerics.gradcheck import finite_difference_gradient

__all__ = [
    "RngStream",
    "MlpParams",
    "init_mlp",
    "mlp_forward",
    "mlp_backward",
    "AdamState",
    "adam_step",
    "softmax",
    "log_softmax",
    "categorical_entropy",
    "gumbel_softmax",
    "squashed_gaussian_sample",
    "squashed_gaussian_log_prob",
    "finite_difference_gradient",
]

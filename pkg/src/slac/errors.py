"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, TrainingError -> 3,
CompatibilityError -> 4.  UsageError signals a programming error at a
module boundary (bad call order, missing cache) and is never expected
from a well-formed run.
"""


class SlacError(Exception):
    pass


class ConfigError(SlacError):
    """Invalid configuration: bad shapes, unparseable files, out-of-range values."""


class UsageError(SlacError):
    """API misuse, e.g. backward called without a cached forward pass."""


class TrainingError(SlacError):
    """Numerical failure during training (non-finite gradients, losses or targets)."""


class CompatibilityError(SlacError):
    """Checkpoint/world/format mismatch; refusing to proceed."""

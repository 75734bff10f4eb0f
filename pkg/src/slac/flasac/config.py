"""Stage-2 hyperparameters (downstream learning)."""

from __future__ import annotations

from dataclasses import dataclass, field

from slac.errors import ConfigError


@dataclass
class Stage2Config:
    lr: float = 4e-4
    batch_size: int = 64
    tau: float = 0.05
    hidden: list = field(default_factory=lambda: [256, 256])
    utd: int = 10
    alpha: float = 0.1
    warmup_hl_samples: int = 60
    gumbel_tau: float = 1.0
    gamma: float = 0.99
    steps_per_skill: int = 50
    episode_len_hl: int = 10
    total_hl_steps: int = 2000
    eval_every: int = 100
    eval_episodes: int = 10
    buffer_capacity: int = 100_000
    # Small batches and the stated update ratio are load-bearing; overriding
    # them (tests, ablation budgets) must be explicit.
    allow_hparam_override: bool = False

    def validate(self) -> None:
        if self.utd < 1:
            raise ConfigError(f"utd must be >= 1, got {self.utd}")
        if self.batch_size > self.buffer_capacity:
            raise ConfigError("batch_size larger than buffer capacity")
        if self.gumbel_tau <= 0:
            raise ConfigError(f"gumbel temperature must be positive, got {self.gumbel_tau}")
        if not self.allow_hparam_override and (self.batch_size != 64 or self.utd != 10):
            raise ConfigError(
                f"batch_size={self.batch_size}, utd={self.utd} deviate from the stated recipe "
                "(64, 10); set allow_hparam_override to deviate deliberately"
            )

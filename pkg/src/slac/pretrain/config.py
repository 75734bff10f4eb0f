"""Stage-1 hyperparameters.

Defaults follow the published decoder-training recipe; the desk-scale
config files override the capacity knobs (hidden sizes, batch, lr,
discount, reward scale) to fit a single CPU core.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from slac.errors import ConfigError


@dataclass
class Stage1Config:
    lr: float = 1e-4
    batch_size: int = 1024
    tau: float = 0.01
    hidden: list = field(default_factory=lambda: [1024, 1024])
    n_updates: int = 2
    n_envs: int = 16
    alpha: float = 0.0
    warmup_samples: int = 24_000
    lam: float = 0.25  # disentanglement weight, must be < 1
    lambda1: float = 0.01  # |a|^2 penalty
    lambda2: float = 0.1  # |a - a_prev|^2 penalty
    lambda3: float = 0.2  # collision penalty
    lambda4: float = 0.05  # over-force penalty
    steps_per_skill: int = 50
    gamma: float = 0.99
    epochs: int = 250  # one epoch = one skill period across the env vector
    n_codes: int = 4
    p_hit: float = 0.97
    reward_scale: float = 1.0  # scales r inside critic targets only (units change)
    use_raw_prob: bool = False  # ablation: probabilities instead of log-probabilities
    psi_hidden: list = field(default_factory=lambda: [64])
    psi_lr: float = 1e-3
    psi_updates: int = 1  # discriminator steps per SAC update round
    zero_init_skill_columns: bool = False  # optionally start with no skill->action coupling
    clip_psi_penalty: bool = False  # floor log q_psi at chance; see skill_reward
    psi_recent_window: int = 0  # >0: train q_psi on the freshest transitions only
    reset_every_skills: int = 4
    log_every_epochs: int = 5
    buffer_capacity: int = 300_000

    def validate(self) -> None:
        if not self.lam < 1.0:
            raise ConfigError(f"disentanglement weight must satisfy lam < 1, got {self.lam}")
        if not 0.0 < self.p_hit < 1.0:
            raise ConfigError(f"p_hit must be in (0, 1), got {self.p_hit}")
        if self.n_codes < 2:
            raise ConfigError(f"need at least 2 codes per latent dimension, got {self.n_codes}")
        if self.steps_per_skill < 1 or self.n_envs < 1 or self.n_updates < 0:
            raise ConfigError("steps_per_skill/n_envs must be >= 1 and n_updates >= 0")

"""Stage 1: intrinsic-reward pretraining of the latent action decoder."""

from slac.pretrain.config import Stage1Config
from slac.pretrain.rewards import (
    sample_skill,
    fixed_discriminator_logprob,
    skill_reward,
    safety_reward,
    latent_reward,
)
from slac.pretrain.discriminators import DiscriminatorSet
from slac.pretrain.sac import DecoderSac
from slac.pretrain.trainer import train_decoder, load_decoder

__all__ = [
    "Stage1Config",
    "sample_skill",
    "fixed_discriminator_logprob",
    "skill_reward",
    "safety_reward",
    "latent_reward",
    "DiscriminatorSet",
    "DecoderSac",
    "train_decoder",
    "load_decoder",
]

"""Stage 2: factored-critic SAC over the frozen decoder's latent space."""

from slac.flasac.config import Stage2Config
from slac.flasac.adjacency import validate_adjacency, identity_adjacency, full_adjacency
from slac.flasac.policy import TaskPolicy, select_latent
from slac.flasac.critic import FactoredCritic, masked_q
from slac.flasac.updates import critic_update, policy_update
from slac.flasac.trainer import train_task, evaluate, rollout_skill, load_task_policy

__all__ = [
    "Stage2Config",
    "validate_adjacency",
    "identity_adjacency",
    "full_adjacency",
    "TaskPolicy",
    "select_latent",
    "FactoredCritic",
    "masked_q",
    "critic_update",
    "policy_update",
    "train_task",
    "evaluate",
    "rollout_skill",
    "load_task_policy",
]

"""Two-stage latent-action RL at desk scale.

Stage 1 pretrains a multi-discrete latent action decoder in a cheap
particle simulator via skill discovery with a safety-shaped intrinsic
reward.  Stage 2 learns downstream composite-reward tasks in a perturbed
variant of that world with a factored-critic, Gumbel-softmax SAC over the
frozen decoder's latent space.
"""

__version__ = "0.1.0"

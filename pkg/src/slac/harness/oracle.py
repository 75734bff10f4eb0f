"""Q-decomposition oracle suite.

For random composite-reward MDPs: (a) per-term policy-evaluation tables
must sum to the monolithic value-iteration Q, and (b) the factored critic
trained through its regular update path on enumerated transitions must
match that oracle.
"""

from __future__ import annotations

import numpy as np

from slac.flasac.adjacency import full_adjacency
from slac.flasac.config import Stage2Config
from slac.flasac.critic import FactoredCritic
from slac.flasac.updates import critic_update
from slac.harness.mdp import FixedTabularPolicy, TabularMdp, enumerate_transitions, random_mdp, value_iteration
from slac.nets import one_hot
from slac.numerics import RngStream


def train_critic_on_mdp(
    mdp: TabularMdp,
    oracle: dict,
    rng: RngStream,
    outer_iters: int = 100,
    inner_iters: int = 15,
    hidden=(40, 40),
    tol: float = 5e-4,
) -> FactoredCritic:
    """Fit the factored critic to the fixed greedy policy via its normal update.

    Fitted policy evaluation: targets stay frozen (tau = 0) across a block
    of regression steps, then are hard-refreshed.  The learning rate decays
    over blocks so the final fit interpolates the frozen targets tightly;
    stops early once the summed Bellman residual is inside tol.
    """
    batch = enumerate_transitions(mdp)
    critic = FactoredCritic(
        mdp.n_states,
        mdp.n_dims,
        mdp.n_codes,
        full_adjacency(mdp.n_terms, mdp.n_dims),
        list(hidden),
        rng,
    )
    policy = FixedTabularPolicy(oracle["policy"], mdp.code_table())
    update_rng = rng.split("update")
    base_cfg = dict(
        batch_size=len(batch["obs"]),
        tau=0.0,
        hidden=list(hidden),
        utd=1,
        alpha=0.0,
        gamma=mdp.gamma,
        allow_hparam_override=True,
    )
    z = one_hot(batch["codes"], mdp.n_codes)
    next_codes, _ = policy.sample_with_logprob(batch["next_obs"], update_rng)
    next_z = one_hot(next_codes, mdp.n_codes)
    for outer in range(outer_iters):
        lr = 3e-3 * (0.02 ** (outer / max(outer_iters - 1, 1)))  # 3e-3 -> 6e-5
        cfg = Stage2Config(lr=lr, **base_cfg)
        # coarse fits while targets move fast, tight fits once they settle
        inner = inner_iters if outer < int(outer_iters * 0.55) else 4 * inner_iters
        for _ in range(inner):
            critic_update(batch, critic, policy, cfg, update_rng)
        critic.polyak(1.0)
        residual = 0.0
        for i in range(critic.n_terms):
            q, _, _ = critic.q_online(i, batch["obs"], z)
            y = batch["rewards"][:, i] + mdp.gamma * critic.q_target(i, batch["next_obs"], next_z)
            residual += np.abs(q - y).max()
        if residual < tol and outer > 10:
            break
    return critic


def critic_oracle_gap(mdp: TabularMdp, critic: FactoredCritic, oracle: dict) -> float:
    """Max |sum_i Q_i(s, z) - Q*(s, z)| over all state-action pairs."""
    batch = enumerate_transitions(mdp)
    z = one_hot(batch["codes"], mdp.n_codes)
    q_sum = np.zeros(len(batch["obs"]))
    for i in range(critic.n_terms):
        q, _, _ = critic.q_online(i, batch["obs"], z)
        q_sum += q
    q_star = oracle["q_total"][batch["state_idx"], batch["action_idx"]]
    return float(np.abs(q_sum - q_star).max())


def run_oracle_suite(
    seed: int = 0,
    n_mdps: int = 10,
    train_critics: bool = True,
    critic_iters: int = 100,
) -> dict:
    """Returns per-MDP decomposition and critic gaps plus the worst cases."""
    root = RngStream(seed, "oracle")
    results = []
    for k in range(n_mdps):
        mdp_rng = root.split(f"mdp{k}")
        n_states = int(mdp_rng.integers(5, 13))
        n_dims = 2
        n_codes = int(mdp_rng.integers(2, 4))
        n_terms = int(mdp_rng.integers(2, 5))
        mdp = random_mdp(mdp_rng.split("build"), n_states, n_dims, n_codes, n_terms, gamma=0.9)
        oracle = value_iteration(mdp, tol=1e-12)
        q_sum = sum(oracle["q_terms"])
        vi_gap = float(np.abs(q_sum - oracle["q_total"]).max())
        entry = {
            "mdp": k,
            "n_states": n_states,
            "n_codes": n_codes,
            "n_terms": n_terms,
            "vi_gap": vi_gap,
        }
        if train_critics:
            critic = train_critic_on_mdp(mdp, oracle, mdp_rng.split("critic"), outer_iters=critic_iters)
            entry["critic_gap"] = critic_oracle_gap(mdp, critic, oracle)
        results.append(entry)
    out = {
        "mdps": results,
        "max_vi_gap": max(r["vi_gap"] for r in results),
    }
    if train_critics:
        out["max_critic_gap"] = max(r["critic_gap"] for r in results)
    return out

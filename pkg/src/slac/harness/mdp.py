"""Tabular MDPs with composite rewards and the value-iteration oracle.

Actions are joint latent codes (N dimensions of K codes, enumerated row
by row), so the same MDPs can drive both the exact oracle and the
factored critic trained through the regular update path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from slac.errors import ConfigError
from slac.numerics import RngStream


@dataclass
class TabularMdp:
    transition: np.ndarray  # (S, A, S) probabilities, rows sum to 1
    rewards: np.ndarray  # (m, S, A)
    gamma: float
    n_dims: int
    n_codes: int

    def __post_init__(self):
        s, a, s2 = self.transition.shape
        if s != s2:
            raise ConfigError("transition tensor must be (S, A, S)")
        if self.rewards.shape[1:] != (s, a):
            raise ConfigError("reward tensor must be (m, S, A)")
        if a != self.n_codes**self.n_dims:
            raise ConfigError("action count must equal n_codes ** n_dims")
        rowsum = self.transition.sum(axis=-1)
        if not np.allclose(rowsum, 1.0, atol=1e-9):
            raise ConfigError("transition rows must sum to 1")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def n_terms(self) -> int:
        return self.rewards.shape[0]

    def code_table(self) -> np.ndarray:
        """(A, N) integer codes for each enumerated joint action."""
        return np.array(list(itertools.product(range(self.n_codes), repeat=self.n_dims)))


def random_mdp(
    rng: RngStream,
    n_states: int,
    n_dims: int,
    n_codes: int,
    n_terms: int,
    gamma: float = 0.9,
    deterministic: bool = True,
) -> TabularMdp:
    """Random composite-reward MDP; deterministic transitions by default."""
    n_actions = n_codes**n_dims
    if deterministic:
        nxt = rng.integers(0, n_states, size=(n_states, n_actions))
        transition = np.zeros((n_states, n_actions, n_states))
        transition[np.arange(n_states)[:, None], np.arange(n_actions)[None, :], nxt] = 1.0
    else:
        raw = rng.uniform(0.1, 1.0, size=(n_states, n_actions, n_states))
        transition = raw / raw.sum(axis=-1, keepdims=True)
    # per-term scale 1/m keeps the summed reward O(1) across term counts
    rewards = rng.uniform(-1.0, 1.0, size=(n_terms, n_states, n_actions)) / n_terms
    return TabularMdp(transition, rewards, gamma, n_dims, n_codes)


def value_iteration(mdp: TabularMdp, tol: float = 1e-10, max_iters: int = 100_000) -> dict:
    """Optimal Q for the summed reward, then per-term policy evaluation.

    The per-term tables are evaluated under the greedy policy of the
    summed problem (the same policy-evaluation operator for every term),
    so their sum equals the monolithic Q up to the iteration tolerance.
    """
    r_total = mdp.rewards.sum(axis=0)
    q = np.zeros_like(r_total)
    for _ in range(max_iters):
        v = q.max(axis=1)
        q_new = r_total + mdp.gamma * mdp.transition @ v
        delta = np.abs(q_new - q).max()
        q = q_new
        if delta < tol:
            break
    policy = q.argmax(axis=1)

    per_term = []
    for i in range(mdp.n_terms):
        qi = np.zeros_like(r_total)
        for _ in range(max_iters):
            v = qi[np.arange(mdp.n_states), policy]
            qi_new = mdp.rewards[i] + mdp.gamma * mdp.transition @ v
            delta = np.abs(qi_new - qi).max()
            qi = qi_new
            if delta < tol:
                break
        per_term.append(qi)
    return {"q_total": q, "q_terms": per_term, "policy": policy}


class FixedTabularPolicy:
    """Deterministic latent policy over one-hot state observations.

    Provides the sample_with_logprob interface the critic update needs,
    with log-prob 0 (probability 1) for the chosen codes.
    """

    def __init__(self, policy: np.ndarray, code_table: np.ndarray):
        self.policy = np.asarray(policy)
        self.code_table = np.asarray(code_table)

    def sample_with_logprob(self, obs: np.ndarray, rng) -> tuple:
        states = np.argmax(obs, axis=-1)
        codes = self.code_table[self.policy[states]]
        return codes, np.zeros(len(states))


def enumerate_transitions(mdp: TabularMdp) -> dict:
    """All (s, a) pairs as a critic-update batch over one-hot observations.

    Requires deterministic transitions so the enumerated batch carries the
    exact Bellman information.
    """
    if not np.allclose(mdp.transition.max(axis=-1), 1.0):
        raise ConfigError("enumerate_transitions requires deterministic transitions")
    s_idx, a_idx = np.meshgrid(np.arange(mdp.n_states), np.arange(mdp.n_actions), indexing="ij")
    s_idx = s_idx.ravel()
    a_idx = a_idx.ravel()
    next_idx = mdp.transition.argmax(axis=-1)[s_idx, a_idx]
    eye = np.eye(mdp.n_states)
    codes = mdp.code_table()[a_idx]
    return {
        "obs": eye[s_idx],
        "codes": codes,
        "rewards": mdp.rewards[:, s_idx, a_idx].T,
        "next_obs": eye[next_idx],
        "done": np.zeros(len(s_idx), dtype=bool),
        "state_idx": s_idx,
        "action_idx": a_idx,
    }

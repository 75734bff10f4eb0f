import numpy as np

from slac.harness.mdp import FixedTabularPolicy, enumerate_transitions, random_mdp, value_iteration
from slac.harness.oracle import critic_oracle_gap, run_oracle_suite, train_critic_on_mdp
from slac.numerics import RngStream


def test_vi_identity_on_suite_without_critics():
    res = run_oracle_suite(seed=0, n_mdps=10, train_critics=False)
    assert res["max_vi_gap"] < 1e-6
    assert len(res["mdps"]) == 10
    for r in res["mdps"]:
        assert 2 <= r["n_terms"] <= 4
        assert r["n_states"] <= 16


def test_fixed_tabular_policy_interface():
    mdp = random_mdp(RngStream(1, "ftp"), 4, 2, 2, 2)
    oracle = value_iteration(mdp)
    pol = FixedTabularPolicy(oracle["policy"], mdp.code_table())
    batch = enumerate_transitions(mdp)
    codes, logp = pol.sample_with_logprob(batch["next_obs"], None)
    assert codes.shape == (16, 2)
    assert np.array_equal(logp, np.zeros(16))
    # deterministic: same output twice
    codes2, _ = pol.sample_with_logprob(batch["next_obs"], None)
    assert np.array_equal(codes, codes2)


def test_single_mdp_critic_matches_oracle():
    rng = RngStream(2, "single")
    mdp = random_mdp(rng.split("build"), 6, 2, 2, 2, gamma=0.9)
    oracle = value_iteration(mdp, tol=1e-12)
    critic = train_critic_on_mdp(mdp, oracle, rng.split("critic"), outer_iters=80)
    assert critic_oracle_gap(mdp, critic, oracle) < 1e-2

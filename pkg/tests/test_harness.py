import json

import numpy as np
import pytest

from slac.errors import CompatibilityError, ConfigError
from slac.harness import TabularMdp, random_mdp, resolve_experiment, value_iteration
from slac.harness.configfile import parse_config_text
from slac.harness.mdp import enumerate_transitions
from slac.metrics import MetricsWriter, read_metrics
from slac.numerics import RngStream


class TestValueIteration:
    def test_gamma_zero_gives_immediate_reward(self):
        mdp = random_mdp(RngStream(0, "m"), 5, 2, 2, 2, gamma=0.0)
        out = value_iteration(mdp)
        assert np.allclose(out["q_total"], mdp.rewards.sum(axis=0), atol=1e-12)

    def test_single_state_geometric_series(self):
        transition = np.ones((1, 1, 1))
        rewards = np.ones((1, 1, 1))
        mdp = TabularMdp(transition, rewards, gamma=0.5, n_dims=1, n_codes=1)
        out = value_iteration(mdp)
        assert out["q_total"][0, 0] == pytest.approx(2.0, abs=1e-9)

    def test_per_term_sum_matches_monolithic(self):
        for seed in range(5):
            mdp = random_mdp(RngStream(seed, "vi"), 5, 1, 2, 2, gamma=0.9, deterministic=False)
            out = value_iteration(mdp, tol=1e-12)
            assert np.abs(sum(out["q_terms"]) - out["q_total"]).max() < 1e-9

    def test_transition_rows_validated(self):
        bad = np.ones((2, 2, 2))
        with pytest.raises(ConfigError):
            TabularMdp(bad, np.zeros((1, 2, 2)), 0.9, 1, 2)

    def test_enumerate_transitions_covers_all_pairs(self):
        mdp = random_mdp(RngStream(3, "en"), 4, 2, 2, 2)
        batch = enumerate_transitions(mdp)
        assert len(batch["obs"]) == 4 * 4
        assert batch["rewards"].shape == (16, 2)
        # one-hot observations recover the state index
        assert np.array_equal(np.argmax(batch["obs"], axis=1), batch["state_idx"])


class TestMetricsWriter:
    def test_valid_jsonl_lines(self, tmp_path):
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path, schema="t/1") as w:
            w.write({"a": 1, "arr": np.array([1.0, 2.0]), "np": np.float64(3.5)})
            w.write({"b": None})
        records = read_metrics(path)
        assert records[0]["a"] == 1 and records[0]["arr"] == [1.0, 2.0] and records[0]["np"] == 3.5
        assert records[0]["schema"] == "t/1"
        assert records[1]["b"] is None

    def test_truncated_tail_tolerated(self, tmp_path):
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path, schema="t/1") as w:
            for i in range(5):
                w.write({"i": i})
        raw = path.read_bytes()
        for cut in (len(raw) - 3, len(raw) - 20, len(raw) // 2 + 1):
            path.write_bytes(raw[:cut])
            records = read_metrics(path)
            assert all(r["i"] == k for k, r in enumerate(records))

    def test_sorted_keys_for_byte_determinism(self, tmp_path):
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        with MetricsWriter(p1, schema="s") as w:
            w.write({"z": 1, "a": 2})
        with MetricsWriter(p2, schema="s") as w:
            w.write({"a": 2, "z": 1})
        assert p1.read_bytes() == p2.read_bytes()


def s2_config(extra_top: str = "", extra_sections: str = "") -> str:
    return (
        f"stage = stage2\nseed = 5\n{extra_top}\n"
        "[world]\nvariant = real\n"
        "[stage2]\ndecoder = /tmp/nonexistent.ckpt\ntotal_hl_steps = 10\n"
        f"{extra_sections}"
    )


class TestResolveExperiment:
    def test_stage1_defaults_materialized(self):
        flat = parse_config_text("stage = stage1\nseed = 1\n")
        exp = resolve_experiment(flat)
        assert exp.stage1.batch_size == 1024
        assert exp.resolved["stage1.lr"] == 1e-4
        assert exp.resolved["world.damping"] == 0.25
        assert exp.resolved["stage1.hidden"] == [1024, 1024]

    def test_real_variant_constants(self):
        flat = parse_config_text("stage = baseline\nseed = 1\n[world]\nvariant = real\n")
        exp = resolve_experiment(flat)
        assert exp.world_cfg.damping == 0.40
        assert exp.world_cfg.accel_gain == 0.85
        assert exp.world_cfg.action_noise_std == 0.02
        assert exp.world_cfg.obs_noise_std == 0.01

    def test_unknown_key_rejected(self):
        flat = parse_config_text("stage = stage1\nseed = 1\n[stage1]\nlearning_rate = 0.1\n")
        with pytest.raises(ConfigError, match="learning_rate"):
            resolve_experiment(flat)

    def test_stage_conflict_rejected(self):
        flat = parse_config_text("stage = stage1\nseed = 1\n")
        with pytest.raises(ConfigError, match="conflicts"):
            resolve_experiment(flat, stage="stage2")

    def test_missing_seed_rejected(self):
        flat = parse_config_text("stage = stage1\n")
        with pytest.raises(ConfigError, match="seed"):
            resolve_experiment(flat)

    def test_no_temporal_forces_steps_per_skill(self):
        flat = parse_config_text(s2_config(extra_top="no_temporal = true"))
        exp = resolve_experiment(flat)
        assert exp.stage2.steps_per_skill == 1

    def test_no_disentangle_gives_full_adjacency(self):
        flat = parse_config_text(s2_config(extra_top="no_disentangle = true"))
        exp = resolve_experiment(flat)
        assert np.array_equal(exp.adjacency, np.ones((4, 4)))

    def test_identity_adjacency_default(self):
        flat = parse_config_text(s2_config())
        exp = resolve_experiment(flat)
        assert np.array_equal(exp.adjacency, np.eye(4))

    def test_adjacency_rows_parsed(self):
        text = s2_config(extra_sections="[adjacency]\nrow0 = [1, 1, 0, 0]\nrow1 = [0, 0, 1, 1]\n")
        with pytest.raises(ConfigError):
            # 2 rows for 4 reward terms: shape mismatch must be caught
            resolve_experiment(parse_config_text(text))

    def test_explicit_adjacency_rows_accepted(self):
        rows = "[adjacency]\n" + "\n".join(f"row{i} = [1, 1, 1, 1]" for i in range(4))
        exp = resolve_experiment(parse_config_text(s2_config(extra_sections=rows)))
        assert np.array_equal(exp.adjacency, np.ones((4, 4)))

    def test_stage1_no_disentangle_zeroes_lambda(self):
        flat = parse_config_text("stage = stage1\nseed = 1\nno_disentangle = true\n")
        exp = resolve_experiment(flat)
        assert exp.stage1.lam == 0.0

    def test_lambda_bound_enforced(self):
        flat = parse_config_text("stage = stage1\nseed = 1\n[stage1]\nlam = 1.5\n")
        with pytest.raises(ConfigError, match="lam"):
            resolve_experiment(flat)

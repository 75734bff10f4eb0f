import json
import subprocess
import sys

import numpy as np
import pytest

from slac.errors import ConfigError
from slac.harness.runner import run

STAGE1_SMALL = """
stage = stage1
seed = 11
[world]
variant = sim
n_agents = 2
[stage1]
hidden = [16, 16]
epochs = 2
warmup_samples = 64
batch_size = 32
buffer_capacity = 2000
log_every_epochs = 1
"""

STAGE2_SMALL = """
stage = stage2
seed = 12
[world]
variant = real
n_agents = 2
[stage2]
decoder = {decoder}
hidden = [16, 16]
total_hl_steps = 6
warmup_hl_samples = 2
eval_every = 3
eval_episodes = 1
episode_len_hl = 2
allow_hparam_override = true
batch_size = 8
utd = 1
"""

BASELINE_SMALL = """
stage = baseline
seed = 13
[world]
variant = real
n_agents = 2
[baseline]
hidden = [16, 16]
total_ll_steps = 300
warmup_ll_steps = 50
update_every = 10
batch_size = 16
eval_every_hl = 4
eval_episodes = 1
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestRunDispatch:
    def test_stage1_writes_artifacts(self, tmp_path):
        out = run(write_cfg(tmp_path, STAGE1_SMALL), outdir=tmp_path / "out")
        assert (out / "decoder.ckpt").exists()
        assert (out / "metrics.jsonl").exists()
        assert (out / "resolved_config.cfg").exists()
        snapshot = (out / "resolved_config.cfg").read_text()
        assert "stage1.lr" in snapshot or "lr = " in snapshot  # defaults materialized

    def test_same_config_and_seed_byte_identical_metrics(self, tmp_path):
        cfg = write_cfg(tmp_path, STAGE1_SMALL)
        out1 = run(cfg, outdir=tmp_path / "a")
        out2 = run(cfg, outdir=tmp_path / "b")
        assert (out1 / "metrics.jsonl").read_bytes() == (out2 / "metrics.jsonl").read_bytes()
        assert (out1 / "resolved_config.cfg").read_bytes() == (out2 / "resolved_config.cfg").read_bytes()

    def test_full_pipeline_stage1_to_stage2_to_eval(self, tmp_path):
        s1 = run(write_cfg(tmp_path, STAGE1_SMALL), outdir=tmp_path / "s1")
        s2cfg = write_cfg(tmp_path, STAGE2_SMALL.format(decoder=s1 / "decoder.ckpt"), "s2.cfg")
        s2 = run(s2cfg, outdir=tmp_path / "s2")
        assert (s2 / "policy.ckpt").exists()
        eval_cfg = write_cfg(
            tmp_path,
            "stage = eval\nseed = 5\n[world]\nvariant = real\nn_agents = 2\n"
            f"[eval]\npolicy = {s2 / 'policy.ckpt'}\ndecoder = {s1 / 'decoder.ckpt'}\n"
            "n_episodes = 2\ndump_trajectory = true\n"
            "[stage2]\nepisode_len_hl = 2\nallow_hparam_override = true\n",
            "eval.cfg",
        )
        ev = run(eval_cfg, outdir=tmp_path / "ev")
        report = json.loads((ev / "eval.json").read_text())
        assert set(report) == {"success_rate", "mean_return", "safety_violations", "n_episodes"}
        traj = (ev / "trajectory.csv").read_text().splitlines()
        assert traj[0] == "episode,hl_step,ll_step,agent,x,y"
        assert len(traj) == 1 + 2 * 2 * 50 * 2  # episodes * hl * ll * agents

    def test_stage2_rejects_wrong_world_decoder(self, tmp_path):
        from slac.errors import CompatibilityError

        s1 = run(write_cfg(tmp_path, STAGE1_SMALL), outdir=tmp_path / "s1")
        bad = STAGE2_SMALL.format(decoder=s1 / "decoder.ckpt").replace("n_agents = 2", "n_agents = 3")
        with pytest.raises(CompatibilityError):
            run(write_cfg(tmp_path, bad, "bad.cfg"), outdir=tmp_path / "s2")

    def test_stage2_missing_decoder_is_config_error(self, tmp_path):
        cfg = write_cfg(tmp_path, STAGE2_SMALL.format(decoder="/nope/decoder.ckpt"), "s2.cfg")
        with pytest.raises(ConfigError):
            run(cfg, outdir=tmp_path / "out")

    def test_baseline_runs(self, tmp_path):
        out = run(write_cfg(tmp_path, BASELINE_SMALL), outdir=tmp_path / "out")
        assert (out / "baseline.ckpt").exists()
        from slac.metrics import read_metrics

        records = read_metrics(out / "metrics.jsonl")
        assert records[-1]["ll_steps"] == 300
        assert records[-1]["hl_step"] == 6

    def test_outdir_required(self, tmp_path):
        with pytest.raises(ConfigError, match="output directory"):
            run(write_cfg(tmp_path, STAGE1_SMALL))

    def test_env_var_overrides(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLAC_OUTDIR", str(tmp_path / "envout"))
        monkeypatch.setenv("SLAC_SEED", "99")
        out = run(write_cfg(tmp_path, STAGE1_SMALL))
        assert out == tmp_path / "envout"
        assert "seed = 99" in (out / "resolved_config.cfg").read_text()

    def test_seed_priority_cli_over_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLAC_SEED", "99")
        out = run(write_cfg(tmp_path, STAGE1_SMALL), seed=55, outdir=tmp_path / "o")
        assert "seed = 55" in (out / "resolved_config.cfg").read_text()


class TestCliExitCodes:
    def _cli(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "slac.harness.cli", *args],
            capture_output=True,
            text=True,
        )

    def test_config_error_exit_2(self, tmp_path):
        bad = write_cfg(tmp_path, "stage = stage1\nseed 7\n")
        proc = self._cli("stage1", "--config", str(bad), "--outdir", str(tmp_path / "o"))
        assert proc.returncode == 2
        assert "config error" in proc.stderr

    def test_compat_refusal_exit_4(self, tmp_path):
        run(write_cfg(tmp_path, STAGE1_SMALL), outdir=tmp_path / "s1")
        bad = STAGE2_SMALL.format(decoder=tmp_path / "s1" / "decoder.ckpt").replace(
            "n_agents = 2", "n_agents = 3"
        )
        cfg = write_cfg(tmp_path, bad, "bad.cfg")
        proc = self._cli("stage2", "--config", str(cfg), "--outdir", str(tmp_path / "o"))
        assert proc.returncode == 4
        assert "compatibility refusal" in proc.stderr

    def test_success_exit_0(self, tmp_path):
        cfg = write_cfg(tmp_path, STAGE1_SMALL)
        proc = self._cli("stage1", "--config", str(cfg), "--outdir", str(tmp_path / "o"))
        assert proc.returncode == 0, proc.stderr

    def test_list_configs(self, tmp_path):
        (tmp_path / "a.cfg").write_text("stage = stage1\n")
        proc = self._cli("list-configs", "--dir", str(tmp_path))
        assert proc.returncode == 0
        assert "a.cfg" in proc.stdout


class TestPipelineDeterminism:
    def test_stage2_first_skill_reproducible_across_processes(self, tmp_path):
        """A stage-1 checkpoint consumed twice yields identical stage-2 metrics."""
        s1 = run(write_cfg(tmp_path, STAGE1_SMALL), outdir=tmp_path / "s1")
        cfg = write_cfg(tmp_path, STAGE2_SMALL.format(decoder=s1 / "decoder.ckpt"), "s2.cfg")
        out1 = run(cfg, outdir=tmp_path / "a")
        out2 = run(cfg, outdir=tmp_path / "b")
        assert (out1 / "metrics.jsonl").read_bytes() == (out2 / "metrics.jsonl").read_bytes()
        assert (out1 / "policy.ckpt").read_bytes() == (out2 / "policy.ckpt").read_bytes()

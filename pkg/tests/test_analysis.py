import json

import numpy as np

from slac.harness.analysis import ema, final_eval_success, max_smoothed_return, return_series, safety_per_1k_steps, steps_to_threshold


def write_log(path, rows):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")


def test_ema_factor_zero_is_identity():
    x = np.array([1.0, 5.0, -2.0])
    assert np.array_equal(ema(x, 0.0), x)


def test_ema_smooths_toward_tail():
    x = np.concatenate([np.zeros(50), np.ones(50)])
    s = ema(x, 0.9)
    assert s[49] == 0.0
    assert 0.9 < s[-1] < 1.0


def test_steps_to_threshold(tmp_path):
    rows = [
        {"hl_step": i, "ll_steps": 50 * i, "return_sum": 0.0 if i < 10 else 4.0, "safety_violations": 1}
        for i in range(1, 31)
    ]
    path = tmp_path / "m.jsonl"
    write_log(path, rows)
    hit = steps_to_threshold(path, 2.0, smooth=0.5)
    assert hit is not None and 500 <= hit <= 700
    assert steps_to_threshold(path, 100.0) is None
    assert max_smoothed_return(path, smooth=0.0) == 4.0


def test_safety_per_1k(tmp_path):
    rows = [{"hl_step": i, "ll_steps": 50 * i, "return_sum": 0.0, "safety_violations": 2} for i in range(1, 21)]
    path = tmp_path / "m.jsonl"
    write_log(path, rows)
    assert safety_per_1k_steps(path) == 40.0  # 40 violations over 1000 steps


def test_final_eval_success(tmp_path):
    rows = [
        {"hl_step": 1, "ll_steps": 50, "return_sum": 0, "success_eval": None},
        {"hl_step": 2, "ll_steps": 100, "return_sum": 0, "success_eval": 0.3},
        {"hl_step": 3, "ll_steps": 150, "return_sum": 0, "success_eval": None},
    ]
    path = tmp_path / "m.jsonl"
    write_log(path, rows)
    assert final_eval_success(path) == 0.3

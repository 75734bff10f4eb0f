import numpy as np
import pytest

from slac.errors import ConfigError
from slac.numerics import (
    RngStream,
    categorical_entropy,
    gumbel_softmax,
    log_softmax,
    softmax,
    squashed_gaussian_log_prob,
    squashed_gaussian_sample,
)
from slac.numerics.distributions import (
    categorical_entropy_backward,
    gumbel_softmax_backward,
    softmax_backward,
)
from slac.numerics.gradcheck import finite_difference_gradient


class FixedNoise:
    """Stands in for an RngStream with predetermined draws."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)

    def normal(self, size=None):
        return np.broadcast_to(self.value, size).copy() if size else self.value

    def gumbel(self, size=None):
        return np.broadcast_to(self.value, size).copy() if size else self.value


def test_gumbel_rejects_bad_tau():
    with pytest.raises(ConfigError):
        gumbel_softmax(np.zeros(4), 0.0, RngStream(0, "g"))
    with pytest.raises(ConfigError):
        gumbel_softmax(np.zeros(4), -1.0, RngStream(0, "g"))


def test_gumbel_sums_to_one():
    rng = RngStream(4, "gumbel-sum")
    for _ in range(50):
        y = gumbel_softmax(rng.normal(size=6) * 5, 1.0, rng)
        assert abs(y.sum() - 1.0) < 1e-12
        assert (y >= 0).all()


def test_gumbel_zero_temperature_limit_is_hard_argmax():
    logits = np.array([0.3, 1.2, -0.7, 0.9])
    noise = np.array([0.1, -0.4, 2.5, 0.2])
    y = gumbel_softmax(logits, 1e-6, FixedNoise(noise))
    hard = np.zeros(4)
    hard[np.argmax(logits + noise)] = 1.0
    assert np.abs(y - hard).max() < 1e-6


def test_gumbel_argmax_frequencies_match_softmax():
    rng = RngStream(7, "gumbel-freq")
    logits = np.array([1.0, 0.0, -1.0, 0.5])
    n = 20_000
    draws = gumbel_softmax(np.tile(logits, (n, 1)), 1.0, rng)
    freq = np.bincount(np.argmax(draws, axis=1), minlength=4) / n
    tv = 0.5 * np.abs(freq - softmax(logits)).sum()
    assert tv < 0.02


def test_gumbel_backward_matches_finite_differences():
    rng = RngStream(8, "gumbel-fd")
    logits = rng.normal(size=5)
    noise = rng.gumbel(size=5)
    w = rng.normal(size=5)
    tau = 0.7

    def f(lg):
        return float(softmax((lg + noise) / tau) @ w)

    y = softmax((logits + noise) / tau)
    grad = gumbel_softmax_backward(y, tau, w)
    fd = finite_difference_gradient(f, logits.copy(), 1e-6)
    assert np.abs(grad - fd).max() < 1e-7


def test_softmax_backward_matches_finite_differences():
    rng = RngStream(12, "softmax-fd")
    u = rng.normal(size=6)
    w = rng.normal(size=6)
    grad = softmax_backward(softmax(u), w)
    fd = finite_difference_gradient(lambda x: float(softmax(x) @ w), u.copy(), 1e-6)
    assert np.abs(grad - fd).max() < 1e-7


def test_squashed_gaussian_near_deterministic_limit():
    rng = RngStream(3, "sq-det")
    mean = np.array([0.3, -1.2, 2.0])
    action, _, _ = squashed_gaussian_sample(mean, np.full(3, -10.0), rng)
    assert np.abs(action - np.tanh(mean)).max() < 1e-3


def test_squashed_gaussian_zero_noise_symmetry():
    action, log_prob, _ = squashed_gaussian_sample(np.zeros(1), np.zeros(1), FixedNoise(np.zeros(1)))
    assert action[0] == 0.0
    # standard normal density at 0, tanh correction log(1 - 0) = 0
    assert abs(log_prob - (-0.5 * np.log(2 * np.pi))) < 1e-12


def test_squashed_gaussian_log_std_clamped():
    rng = RngStream(5, "sq-clamp")
    a_lo, _, _ = squashed_gaussian_sample(np.zeros(2), np.full(2, -50.0), rng)
    assert np.abs(a_lo).max() < 1e-3  # behaves like log_std = -10, not -50


def test_squashed_gaussian_density_integrates_to_one():
    mean = np.array([0.4])
    log_std = np.array([-0.3])
    # integrate p(a) over (-1, 1) via the substitution a = tanh(u)
    nodes, weights = np.polynomial.legendre.leggauss(200)
    lo, hi = mean[0] - 9 * np.exp(log_std[0]), mean[0] + 9 * np.exp(log_std[0])
    u = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    a = np.tanh(u)
    log_p = np.array([squashed_gaussian_log_prob(mean, log_std, np.array([ai])) for ai in a])
    integrand = np.exp(log_p) * (1.0 - a**2)
    total = 0.5 * (hi - lo) * (weights * integrand).sum()
    assert abs(total - 1.0) < 1e-3


def test_squashed_log_prob_agrees_with_sample_path():
    rng = RngStream(6, "sq-agree")
    mean = rng.normal(size=4)
    log_std = rng.normal(size=4) * 0.3
    action, lp_sample, _ = squashed_gaussian_sample(mean, log_std, rng)
    lp_eval = squashed_gaussian_log_prob(mean, log_std, action)
    assert abs(lp_sample - lp_eval) < 1e-8


def test_entropy_uniform_is_log_k():
    assert abs(categorical_entropy(np.zeros(4)) - np.log(4)) < 1e-12
    assert abs(categorical_entropy(np.full(7, 3.3)) - np.log(7)) < 1e-12


def test_entropy_peaked_is_tiny():
    assert categorical_entropy(np.array([100.0, 0.0, 0.0, 0.0])) < 1e-6


def test_entropy_matches_direct_summation():
    rng = RngStream(2, "ent")
    logits = rng.normal(size=9) * 3
    p = np.exp(logits) / np.exp(logits).sum()
    direct = -(p * np.log(p)).sum()
    assert abs(categorical_entropy(logits) - direct) < 1e-12


def test_entropy_backward_matches_finite_differences():
    rng = RngStream(13, "ent-fd")
    logits = rng.normal(size=5)
    grad = categorical_entropy_backward(logits)
    fd = finite_difference_gradient(lambda x: float(categorical_entropy(x)), logits.copy(), 1e-6)
    assert np.abs(grad - fd).max() < 1e-7


def test_log_softmax_is_normalized():
    rng = RngStream(1, "ls")
    logits = rng.normal(size=(3, 5)) * 10
    lp = log_softmax(logits)
    assert np.abs(np.exp(lp).sum(axis=-1) - 1.0).max() < 1e-12

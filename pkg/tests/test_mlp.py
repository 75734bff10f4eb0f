import numpy as np
import pytest

from slac.errors import ConfigError, UsageError
from slac.numerics import RngStream, finite_difference_gradient, init_mlp, mlp_backward, mlp_forward
from slac.numerics.mlp import MlpParams


def relu_oracle(params, x):
    """Independent straight-line matmul + ReLU chain."""
    h = x
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i < len(params.weights) - 1:
            h = np.maximum(h, 0.0)
    return h


def test_zero_weights_return_bias():
    params = MlpParams(weights=[np.zeros((3, 2))], biases=[np.array([1.5, -2.0])])
    y, _ = mlp_forward(params, np.array([4.0, 5.0, 6.0]))
    assert np.array_equal(y, [1.5, -2.0])


def test_identity_single_layer():
    params = MlpParams(weights=[np.eye(2)], biases=[np.zeros(2)])
    y, _ = mlp_forward(params, np.array([1.0, -2.0]))
    assert np.array_equal(y, [1.0, -2.0])


def test_matches_straight_line_oracle():
    rng = RngStream(3, "mlp-oracle")
    params = init_mlp([5, 16, 7], rng)
    x = rng.normal(size=5)
    y, _ = mlp_forward(params, x)
    assert np.abs(y - relu_oracle(params, x)).max() < 1e-12


def test_shape_mismatch_raises():
    params = init_mlp([4, 3], RngStream(0, "m"))
    with pytest.raises(ConfigError):
        mlp_forward(params, np.zeros(5))


def test_missing_cache_raises():
    params = init_mlp([4, 3], RngStream(0, "m"))
    with pytest.raises(UsageError):
        mlp_backward(params, None, np.zeros(3))


def test_linear_layer_grads():
    # single linear layer, upstream 1: dW = x, db = 1
    params = MlpParams(weights=[np.zeros((3, 1))], biases=[np.zeros(1)])
    x = np.array([2.0, -1.0, 0.5])
    _, cache = mlp_forward(params, x)
    grads, _ = mlp_backward(params, cache, np.array([1.0]))
    assert np.array_equal(grads.weights[0][:, 0], x)
    assert np.array_equal(grads.biases[0], [1.0])


def test_relu_dead_zone_blocks_gradient():
    # hidden unit forced negative: no gradient through it
    params = MlpParams(
        weights=[np.array([[1.0]]), np.array([[1.0]])],
        biases=[np.array([-5.0]), np.array([0.0])],
    )
    _, cache = mlp_forward(params, np.array([1.0]))  # pre-activation = -4
    grads, gin = mlp_backward(params, cache, np.array([1.0]))
    assert grads.weights[0][0, 0] == 0.0
    assert gin[0] == 0.0


def test_gradients_match_finite_differences():
    rng = RngStream(11, "mlp-fd")
    params = init_mlp([4, 12, 6, 2], rng)
    x = rng.normal(size=4)
    w_out = rng.normal(size=2)
    y, cache = mlp_forward(params, x)
    grads, gin = mlp_backward(params, cache, w_out)

    def loss_of_input(xv):
        yy, _ = mlp_forward(params, xv)
        return float(yy @ w_out)

    fd = finite_difference_gradient(loss_of_input, x.copy(), 1e-5)
    assert np.abs(gin - fd).max() / max(np.abs(fd).max(), 1.0) < 1e-4

    for li in range(len(params.weights)):
        w_orig = params.weights[li]

        def loss_of_w(wv):
            saved = params.weights[li]
            params.weights[li] = wv
            yy, _ = mlp_forward(params, x)
            params.weights[li] = saved
            return float(yy @ w_out)

        fd_w = finite_difference_gradient(loss_of_w, w_orig.copy(), 1e-5)
        err = np.abs(grads.weights[li] - fd_w).max() / max(np.abs(fd_w).max(), 1.0)
        assert err < 1e-4


def test_batched_forward_matches_per_row():
    rng = RngStream(5, "mlp-batch")
    params = init_mlp([3, 8, 2], rng)
    xb = rng.normal(size=(6, 3))
    yb, _ = mlp_forward(params, xb)
    for i in range(6):
        yi, _ = mlp_forward(params, xb[i])
        assert np.allclose(yb[i], yi, atol=1e-15)


def test_batched_param_grads_sum_over_batch():
    rng = RngStream(6, "mlp-batch-grad")
    params = init_mlp([3, 8, 2], rng)
    xb = rng.normal(size=(4, 3))
    g = rng.normal(size=(4, 2))
    _, cache = mlp_forward(params, xb)
    grads, _ = mlp_backward(params, cache, g)
    acc = params.zeros_like()
    for i in range(4):
        _, ci = mlp_forward(params, xb[i])
        gi, _ = mlp_backward(params, ci, g[i])
        for a, b in zip(acc.arrays(), gi.arrays()):
            a += b
    for got, want in zip(grads.arrays(), acc.arrays()):
        assert np.allclose(got, want, atol=1e-12)


def test_init_bounds_scale_with_fan_in():
    params = init_mlp([100, 50, 10], RngStream(2, "init"))
    assert np.abs(params.weights[0]).max() <= 1.0 / np.sqrt(100)
    assert np.abs(params.weights[1]).max() <= 1.0 / np.sqrt(50)
    assert np.all(np.isfinite(params.weights[0]))

import dataclasses

import numpy as np
import pytest

from resonance import harness
from resonance.mlp import MlpParams, flatten, forward, grad, he_init, unflatten
from resonance.optim import SgdmState, sgdm_step
from resonance.rng import Rng


def test_he_init_variance():
    d_in = 4
    values = []
    rng = Rng(19)
    while len(values) < 10_000:
        params = he_init(d_in, rng)
        values.extend(params.weights[0].ravel().tolist())
    var = np.var(values[:10_000])
    assert abs(var - 2.0 / d_in) < 0.05 * (2.0 / d_in)


def test_he_init_biases_zero_and_deterministic():
    p1 = he_init(3, Rng(7))
    p2 = he_init(3, Rng(7))
    assert all(np.all(b == 0.0) for b in p1.biases)
    assert all(np.array_equal(a, b) for a, b in zip(p1.weights, p2.weights))
    assert p1.layer_dims == [3, 20, 20, 1]


def test_forward_zero_params():
    params = he_init(2, Rng(1))
    zeros = MlpParams([np.zeros_like(w) for w in params.weights],
                      [np.zeros_like(b) for b in params.biases])
    x = Rng(2).normals((5, 2))
    assert np.all(forward(zeros, x) == 0.0)


def test_forward_output_layer_linearity():
    params = he_init(2, Rng(3))
    doubled = params.copy()
    doubled.weights[-1] = 2.0 * doubled.weights[-1]
    x = Rng(4).normals((6, 2))
    assert np.allclose(forward(doubled, x), 2.0 * forward(params, x))


def test_relu_clamp_identity():
    x = Rng(5).normals(1000)
    assert np.array_equal(np.maximum(0.0, x), (x + np.abs(x)) / 2.0)


def test_forward_rejects_wrong_dim():
    params = he_init(3, Rng(6))
    with pytest.raises(ValueError):
        forward(params, np.zeros((4, 2)))


def test_grad_zero_residual():
    params = he_init(2, Rng(8))
    x = Rng(9).normals((10, 2))
    y = forward(params, x)
    gw, gb = grad(params, x, y)
    assert all(np.all(g == 0.0) for g in gw)
    assert all(np.all(g == 0.0) for g in gb)


def test_grad_finite_differences():
    rng = Rng(10)
    for _ in range(3):
        params = he_init(2, rng)
        x = rng.normals((6, 2))
        y = rng.normals(6)
        gw, gb = grad(params, x, y)
        analytic = flatten(gw, gb)
        vec = flatten(params.weights, params.biases)
        fd = np.empty_like(vec)
        h = 1e-5
        for i in range(vec.size):
            bump = vec.copy()
            bump[i] += h
            lp = _loss(unflatten(bump, params), x, y)
            bump[i] -= 2 * h
            lm = _loss(unflatten(bump, params), x, y)
            fd[i] = (lp - lm) / (2 * h)
        assert np.linalg.norm(fd - analytic) / np.linalg.norm(fd) < 1e-4


def _loss(params, x, y):
    r = forward(params, x) - y
    return float(r @ r) / r.size


def test_grad_matches_scalar_chain_rule_oracle():
    # 1-2-1 network, single sample, derivative written out by hand
    w1 = np.array([[0.7], [-1.2]])
    b1 = np.array([0.1, 0.4])
    w2 = np.array([[0.5, -0.8]])
    b2 = np.array([0.2])
    params = MlpParams([w1, w2], [b1, b2])
    x, y = 0.9, -0.3

    z1 = w1[:, 0] * x + b1
    a1 = np.maximum(0.0, z1)
    yhat = float(w2[0] @ a1 + b2[0])
    dl_dyhat = 2.0 * (yhat - y)
    dw2 = dl_dyhat * a1
    db2 = dl_dyhat
    da1 = dl_dyhat * w2[0]
    dz1 = da1 * (z1 > 0)
    dw1 = dz1 * x
    db1 = dz1

    gw, gb = grad(params, np.array([[x]]), np.array([y]))
    assert np.allclose(gw[0][:, 0], dw1)
    assert np.allclose(gb[0], db1)
    assert np.allclose(gw[1][0], dw2)
    assert np.allclose(gb[1][0], db2)


def test_flatten_roundtrip():
    params = he_init(3, Rng(11))
    vec = flatten(params.weights, params.biases)
    back = unflatten(vec, params)
    assert all(np.array_equal(a, b) for a, b in zip(back.weights, params.weights))
    assert all(np.array_equal(a, b) for a, b in zip(back.biases, params.biases))


def test_flat_optimizer_step_equals_per_layer():
    rng = Rng(12)
    params = he_init(2, rng)
    x = rng.normals((10, 2))
    y = rng.normals(10)
    mu, eta = 0.95, 0.01

    flat_state = SgdmState(flatten(params.weights, params.biases), eta=eta, mu=mu)
    vel_w = [np.zeros_like(w) for w in params.weights]
    vel_b = [np.zeros_like(b) for b in params.biases]
    per_layer = params.copy()
    for _ in range(25):
        current = unflatten(flat_state.theta, params)
        gw, gb = grad(current, x, y)
        sgdm_step(flat_state, flatten(gw, gb))

        gw2, gb2 = grad(per_layer, x, y)
        for i in range(len(per_layer.weights)):
            vel_w[i] = mu * vel_w[i] - eta * gw2[i]
            per_layer.weights[i] = per_layer.weights[i] + vel_w[i]
            vel_b[i] = mu * vel_b[i] - eta * gb2[i]
            per_layer.biases[i] = per_layer.biases[i] + vel_b[i]
    assert np.array_equal(
        flat_state.theta, flatten(per_layer.weights, per_layer.biases))


def test_iid_training_reaches_low_test_loss():
    cfg = dataclasses.replace(
        harness.exp6(), axis1=None, axis2=None, period=0, mean_variance=0.4,
        runs=1)
    records = [harness.run_cell(cfg, {}, 0, seed) for seed in range(4)]
    assert not any(r.diverged for r in records)
    assert np.mean([r.metric for r in records]) < 0.05

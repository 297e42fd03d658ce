import numpy as np
import pytest

from resonance.numerics import rk4_ltv
from resonance.optim import (
    DIVERGENCE_CAP, AdamState, SgdmState, adam_step, phase_vector,
    sgdm_step, split_step,
)
from resonance.processes import Sinusoid
from resonance.rng import Rng
from resonance.tasks import grad_matrix_from_mean


def test_sgdm_step_substitution():
    state = SgdmState(np.array([1.0]), eta=0.1, mu=0.9,
                      velocity=np.array([0.5]))
    sgdm_step(state, np.array([1.0]))
    assert np.isclose(state.velocity[0], 0.35)
    assert np.isclose(state.theta[0], 1.35)


def test_sgdm_zero_momentum_is_sgd():
    state = SgdmState(np.zeros(2), eta=0.05, mu=0.0)
    sgdm_step(state, np.array([1.0, -2.0]))
    assert np.allclose(state.velocity, [-0.05, 0.10])


def test_sgdm_fixed_point():
    state = SgdmState(np.array([2.0]), eta=0.1, mu=0.9)
    sgdm_step(state, np.array([0.0]))
    assert state.theta[0] == 2.0 and state.velocity[0] == 0.0


def test_sgdm_nonfinite_grad_freezes():
    state = SgdmState(np.array([1.0]), eta=0.1, mu=0.9)
    sgdm_step(state, np.array([np.nan]))
    assert state.diverged and state.theta[0] == 1.0
    sgdm_step(state, np.array([1.0]))  # frozen: no further updates
    assert state.theta[0] == 1.0


def test_sgdm_cap_flags_divergence():
    state = SgdmState(np.array([0.0]), eta=1.0, mu=0.0)
    sgdm_step(state, np.array([-2.0 * DIVERGENCE_CAP]))
    assert state.diverged and state.diverge_step == 0


def test_sgdm_validates():
    with pytest.raises(ValueError):
        SgdmState(np.zeros(1), eta=0.1, mu=1.0)
    state = SgdmState(np.zeros(2), eta=0.1, mu=0.5)
    with pytest.raises(ValueError):
        sgdm_step(state, np.zeros(3))


def test_adam_first_step_is_signed():
    for g in (3.0, -0.25):
        state = AdamState(np.zeros(1), eta=0.01)
        adam_step(state, np.array([g]))
        assert np.isclose(state.theta[0], -0.01 * np.sign(g), rtol=1e-6)


def test_adam_zero_grad_never_moves():
    state = AdamState(np.array([1.5]), eta=0.01)
    for _ in range(100):
        adam_step(state, np.array([0.0]))
    assert state.theta[0] == 1.5


def test_adam_deterministic():
    def run():
        rng = Rng(12)
        state = AdamState(rng.normals(3), eta=0.01, beta1=0.95)
        for _ in range(200):
            adam_step(state, rng.normals(3))
        return state.theta.copy()

    assert np.array_equal(run(), run())


def test_split_step_identity():
    xi = np.array([0.3, -0.2, 0.0, 0.0])
    out = split_step(xi, np.zeros((2, 2)), 0.95, 0.01)
    assert np.array_equal(out, xi)


def test_split_step_matches_sgdm_one_step():
    rng = Rng(33)
    for _ in range(20):
        mu, eta = 0.95, 0.01
        theta_star = rng.normals(3)
        theta = rng.normals(3)
        v = rng.normals(3) * 0.1
        B = grad_matrix_from_mean(rng.normals(2), 1.0, True)
        state = SgdmState(theta.copy(), eta=eta, mu=mu, velocity=v.copy())
        sgdm_step(state, B @ (theta - theta_star))
        xi = np.concatenate([theta - theta_star, v / np.sqrt(eta)])
        out = split_step(xi, B, mu, eta)
        assert np.max(np.abs(out[:3] + theta_star - state.theta)) <= 1e-12
        assert np.max(np.abs(out[3:] * np.sqrt(eta) - state.velocity)) <= 1e-12


def test_split_step_from_rest_moves_by_eta_B():
    xi = np.array([1.0, -0.5, 0.0, 0.0])
    B = grad_matrix_from_mean(0.3, 1.0, True)
    out = split_step(xi, B, 0.9, 0.01)
    want = xi[:2] - 0.01 * (B @ xi[:2])
    assert np.allclose(out[:2], want, rtol=1e-14)


def test_split_sgdm_equivalence_long_run():
    mu, eta = 0.95, 0.01
    signal = Sinusoid(0.5, 0.013)
    rng = Rng(2)
    theta_star = rng.uniform(-1.0, 1.0, 2)
    theta0 = rng.uniform(-1.0, 1.0, 2)
    state = SgdmState(theta0.copy(), eta=eta, mu=mu)
    xi = np.concatenate([theta0 - theta_star, np.zeros(2)])
    worst = 0.0
    for k in range(1000):
        B = grad_matrix_from_mean(signal.mean_at(k), 1.0, True)
        sgdm_step(state, B @ (state.theta - theta_star))
        xi = split_step(xi, B, mu, eta)
        worst = max(worst, np.max(np.abs(xi[:2] + theta_star - state.theta)))
    assert worst <= 1e-10


def test_split_first_order_consistency():
    # global error against a fine RK4 reference halves with the step
    B = lambda t: grad_matrix_from_mean(0.5 * np.sin(2.0 * np.pi * t), 1.0, True)
    alpha = 0.5
    A = lambda t: np.block([
        [np.zeros((2, 2)), np.eye(2)],
        [-B(t), -alpha * np.eye(2)],
    ])
    xi0 = np.array([1.0, -0.5, 0.0, 0.0])
    ref = rk4_ltv(A, xi0, 0.0, 1.0, 1e-5)

    def split_integrate(h):
        # h = sqrt(eta); alpha fixed => mu = 1 - alpha*h
        xi = xi0.copy()
        t = 0.0
        for _ in range(int(round(1.0 / h))):
            xi = split_step(xi, B(t), 1.0 - alpha * h, h * h)
            t += h
        return xi

    e1 = np.linalg.norm(split_integrate(1e-3) - ref)
    e2 = np.linalg.norm(split_integrate(5e-4) - ref)
    assert 1.6 <= e1 / e2 <= 2.4


def test_iid_constant_curvature_converges():
    B = grad_matrix_from_mean(0.0, 1.0, True)  # 2*I, positive definite
    theta_star = np.array([0.4, -0.8])
    state = SgdmState(np.array([1.0, 1.0]), eta=0.01, mu=0.9)
    for _ in range(10_000):
        sgdm_step(state, B @ (state.theta - theta_star))
    assert np.linalg.norm(state.theta - theta_star) < 1e-3


def test_phase_vector_blocks():
    xi = phase_vector([1.0, 2.0], [0.5, 0.5])
    assert np.array_equal(xi, [0.5, 1.5, 0.0, 0.0])

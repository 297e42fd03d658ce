"""Optimizers: momentum SGD, ADAM, and the split-operator phase-space step.

The momentum update is

    v <- mu*v - eta*grad        theta <- theta + v

in exactly that order.  ``split_step`` advances the equivalent
continuous-time phase state (theta - theta*, thetadot) by one implicit/
explicit Euler composition with time step sqrt(eta); mapping velocities
through v = sqrt(eta)*thetadot reproduces the momentum update, which is
what makes the oscillator analysis speak for the discrete optimizer.

Runs that blow up are frozen rather than allowed to overflow: any
non-finite state or ||theta|| beyond ``DIVERGENCE_CAP`` sets the
``diverged`` flag, records the step, and stops further updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Euclidean norm beyond which a run is declared diverged; diverged runs
#: report this value as their metric so sweep aggregates stay finite.
DIVERGENCE_CAP = 1e8


@dataclass
class SgdmState:
    """Momentum-SGD iterate: weights, velocity, and fixed (eta, mu)."""

    theta: np.ndarray
    eta: float
    mu: float
    velocity: np.ndarray = None
    step: int = 0
    diverged: bool = False
    diverge_step: int = -1

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.velocity is None:
            self.velocity = np.zeros_like(self.theta)
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"need 0 <= mu < 1, got {self.mu}")
        if self.eta <= 0.0:
            raise ValueError(f"need eta > 0, got {self.eta}")


def _flag_divergence(state, step: int) -> None:
    state.diverged = True
    if state.diverge_step < 0:
        state.diverge_step = step


def _state_ok(state, grad: np.ndarray) -> bool:
    if state.diverged:
        return False
    if not np.isfinite(grad).all():
        _flag_divergence(state, state.step)
        return False
    return True


def sgdm_step(state: SgdmState, grad: np.ndarray) -> SgdmState:
    """One momentum update; freezes the state instead of overflowing."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.theta.shape:
        raise ValueError(f"grad shape {grad.shape} != theta shape {state.theta.shape}")
    if not _state_ok(state, grad):
        return state
    state.velocity = state.mu * state.velocity - state.eta * grad
    state.theta = state.theta + state.velocity
    state.step += 1
    norm2 = float(state.theta @ state.theta)
    if not np.isfinite(norm2) or norm2 > DIVERGENCE_CAP * DIVERGENCE_CAP:
        _flag_divergence(state, state.step - 1)
    return state


@dataclass
class AdamState:
    """ADAM iterate with zero-initialized moments and bias correction."""

    theta: np.ndarray
    eta: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    m: np.ndarray = None
    s: np.ndarray = None
    step: int = 0
    diverged: bool = False
    diverge_step: int = -1

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.m is None:
            self.m = np.zeros_like(self.theta)
        if self.s is None:
            self.s = np.zeros_like(self.theta)


def adam_step(state: AdamState, grad: np.ndarray) -> AdamState:
    """One ADAM update (eps added after the square root)."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.theta.shape:
        raise ValueError(f"grad shape {grad.shape} != theta shape {state.theta.shape}")
    if not _state_ok(state, grad):
        return state
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.s = state.beta2 * state.s + (1.0 - state.beta2) * grad * grad
    mhat = state.m / (1.0 - state.beta1 ** state.step)
    shat = state.s / (1.0 - state.beta2 ** state.step)
    state.theta = state.theta - state.eta * mhat / (np.sqrt(shat) + state.eps_hat)
    norm2 = float(state.theta @ state.theta)
    if not np.isfinite(norm2) or norm2 > DIVERGENCE_CAP * DIVERGENCE_CAP:
        _flag_divergence(state, state.step - 1)
    return state


def phase_vector(theta, theta_star, thetadot=None) -> np.ndarray:
    """Stack (theta - theta*, thetadot) into one phase-space vector."""
    theta = np.asarray(theta, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    if thetadot is None:
        thetadot = np.zeros_like(theta)
    return np.concatenate([theta - theta_star, np.asarray(thetadot, dtype=float)])


def split_step(xi: np.ndarray, B: np.ndarray, mu: float, eta: float) -> np.ndarray:
    """Implicit-then-explicit Euler composition with step h = sqrt(eta).

    With blocks xi = (x, xdot), x = theta - theta*:

        xdot' = xdot + h*(-B x - ((1-mu)/sqrt(eta)) * xdot)
        x'    = x + h*xdot'

    Exactly equivalent to one momentum-SGD step on the expected gradient
    B x under the velocity map v = sqrt(eta)*xdot.
    """
    xi = np.asarray(xi, dtype=float)
    d = xi.size // 2
    if B.shape != (d, d):
        raise ValueError(f"B shape {B.shape} incompatible with phase dim {xi.size}")
    h = np.sqrt(eta)
    alpha = (1.0 - mu) / h
    x, xdot = xi[:d], xi[d:]
    xdot_new = xdot + h * (-(B @ x) - alpha * xdot)
    x_new = x + h * xdot_new
    return np.concatenate([x_new, xdot_new])

"""Label generation, squared-error gradients, and the expected-gradient matrix.

The regression target never moves: for the linear task Y = <theta*, X> +
noise with theta* fixed, for the nonlinear task Y = cos(pi*||X||) +
noise.  All time variation enters through the covariates, which is what
turns the expected loss gradient into a time-varying linear map

    g_k(theta) = B_k (theta - theta*),   B_k = 2 E[X_k X_k^T].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .processes import CovariateProcess
from .rng import Rng


@dataclass
class LinearTask:
    """Fixed linear target with optional iid Gaussian observation noise."""

    theta_star: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        self.theta_star = np.asarray(self.theta_star, dtype=float)

    def labels(self, x: np.ndarray, rng: Rng | None = None) -> np.ndarray:
        x = np.atleast_2d(x)
        if x.shape[1] != self.theta_star.size:
            raise ValueError(
                f"input dim {x.shape[1]} != target dim {self.theta_star.size}"
            )
        y = x @ self.theta_star
        if self.noise_var > 0.0:
            y = y + rng.normals(y.shape) * np.sqrt(self.noise_var)
        return y


@dataclass
class NonlinearTask:
    """Radial cosine target cos(pi*||x||) with optional Gaussian noise."""

    noise_var: float = 0.0

    def labels(self, x: np.ndarray, rng: Rng | None = None) -> np.ndarray:
        x = np.atleast_2d(x)
        y = np.cos(np.pi * np.linalg.norm(x, axis=1))
        if self.noise_var > 0.0:
            y = y + rng.normals(y.shape) * np.sqrt(self.noise_var)
        return y


def label(task, x, rng: Rng | None = None) -> float:
    """Single labelled example; see LinearTask/NonlinearTask.labels."""
    return float(task.labels(np.atleast_2d(np.asarray(x, dtype=float)), rng)[0])


def mse_grad(theta: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Mean-squared-error gradient averaged over a batch.

    Per sample the gradient is 2*(<theta, x> - y)*x; the batch returns
    the mean, so step-size semantics do not depend on the batch size.
    """
    x = np.atleast_2d(x)
    y = np.atleast_1d(y)
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if x.shape[0] != y.size or x.shape[1] != np.size(theta):
        raise ValueError(f"shape mismatch: x{x.shape}, y{y.shape}, theta{np.shape(theta)}")
    resid = x @ np.asarray(theta, dtype=float) - y
    return 2.0 / x.shape[0] * (x.T @ resid)


def grad_matrix_from_mean(mean, cov_scale: float, append_bias: bool = True) -> np.ndarray:
    """Expected-gradient matrix B = 2*E[X X^T] for X ~ N(mean, cov_scale*I).

    With a bias coordinate the mean extends to m = [mean; 1] and

        B = 2 * (cov_scale * I  on the mean block)  +  2 * m m^T.

    For a scalar mean with bias and cov_scale=1 this is the closed form
    2*[[1 + xbar^2, xbar], [xbar, 1]].
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    d = mean.size
    m = np.concatenate([mean, [1.0]]) if append_bias else mean
    b = 2.0 * np.outer(m, m)
    b[:d, :d] += 2.0 * cov_scale * np.eye(d)
    return b


def expected_grad_matrix(
    proc: CovariateProcess,
    k: int | None = None,
    t: float | None = None,
    eta: float | None = None,
    rng: Rng | None = None,
) -> np.ndarray:
    """B at discrete step k, or at continuous time t (deterministic means only)."""
    if (k is None) == (t is None):
        raise ValueError("pass exactly one of k or t")
    if t is not None:
        if not proc.mean.deterministic:
            raise ValueError("continuous-time B needs a deterministic mean signal")
        if eta is None:
            raise ValueError("continuous-time B needs eta")
        mean = proc.mean.mean_continuous(t, eta)
    else:
        mean = proc.mean.mean_at(k, rng)
    return grad_matrix_from_mean(mean, proc.cov_scale, proc.append_bias)


def distance_to_target(theta, theta_star) -> float:
    """Euclidean distance ||theta - theta*||."""
    theta = np.asarray(theta, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    if theta.shape != theta_star.shape:
        raise ValueError(f"shape mismatch: {theta.shape} vs {theta_star.shape}")
    return float(np.linalg.norm(theta - theta_star))

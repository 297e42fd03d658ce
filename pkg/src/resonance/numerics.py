"""Small dense linear-algebra and fixed-step ODE kernels.

Everything downstream (oscillator assembly, monodromy integration,
stability classification) runs on matrices no larger than ~64x64, so the
emphasis here is on determinism and explicit failure, not throughput.
Eigenvalues go through LAPACK's Hessenberg + shifted-QR path via numpy;
the matrix exponential and the Runge-Kutta integrator are implemented
here so constant-coefficient systems have a closed-form cross-check that
does not share code with the time-stepping path.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

MAX_DIM = 64


class IntegrationDiverged(RuntimeError):
    """Raised when a fixed-step integration produces non-finite state."""

    def __init__(self, t: float):
        super().__init__(f"integration produced non-finite state at t={t:g}")
        self.t = t


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit shape validation.

    Deterministic for a fixed environment (single BLAS build); inner
    products of the sizes used here are evaluated in one dgemm call.
    """
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def eigvals(m) -> np.ndarray:
    """Full complex spectrum of a square matrix (dimension <= 64).

    Non-convergence of the QR iteration surfaces as
    ``numpy.linalg.LinAlgError`` rather than a silently wrong result.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"eigvals needs a square matrix, got {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds supported {MAX_DIM}")
    if not np.isfinite(m).all():
        raise ValueError("eigvals input contains non-finite entries")
    return np.linalg.eigvals(m).astype(complex)


def spectral_radius(spectrum) -> float:
    """Largest eigenvalue modulus of a (non-empty) spectrum."""
    spectrum = np.asarray(spectrum)
    if spectrum.size == 0:
        raise ValueError("spectral_radius of an empty spectrum")
    return float(np.max(np.abs(spectrum)))


def expm(m, t: float = 1.0) -> np.ndarray:
    """exp(m*t) by scaling-and-squaring of the truncated Taylor series.

    Accurate to better than 1e-10 relative in the norm regimes used here
    (||m||*t up to ~50).  Serves as the independent oracle against which
    the period-map integration is checked.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expm needs a square matrix, got {m.shape}")
    a = m * float(t)
    norm = np.linalg.norm(a, 1)
    s = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0)
    a = a / (2.0 ** s)
    n = a.shape[0]
    result = np.eye(n)
    term = np.eye(n)
    for i in range(1, 40):
        term = term @ a / i
        result = result + term
        if np.linalg.norm(term, 1) < 1e-18 * max(1.0, np.linalg.norm(result, 1)):
            break
    for _ in range(s):
        result = result @ result
    return result


def rk4_ltv(
    A: Callable[[float], np.ndarray],
    x0,
    t0: float,
    t1: float,
    h: float,
) -> np.ndarray:
    """Integrate dx/dt = A(t) x with classical fixed-step RK4.

    ``x0`` may be a vector or a matrix (the latter integrates all columns
    at once, which is how fundamental solution matrices are propagated).
    The final step is shortened to land exactly on ``t1``.  Non-finite
    state raises :class:`IntegrationDiverged`.
    """
    if t1 <= t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    if h <= 0:
        raise ValueError(f"need h > 0, got {h}")
    x = np.array(x0, dtype=float)
    t = t0
    remaining = t1 - t0
    nfull = int(remaining / h)
    steps = [h] * nfull
    tail = remaining - nfull * h
    if tail > 1e-12 * h:
        steps.append(tail)
    with np.errstate(over="ignore", invalid="ignore"):  # blow-up checked below
        for dt in steps:
            k1 = A(t) @ x
            k2 = A(t + 0.5 * dt) @ (x + 0.5 * dt * k1)
            k3 = A(t + 0.5 * dt) @ (x + 0.5 * dt * k2)
            k4 = A(t + dt) @ (x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += dt
            if not np.isfinite(x).all():
                raise IntegrationDiverged(t)
    return x

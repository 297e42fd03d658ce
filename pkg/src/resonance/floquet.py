"""Stability of the momentum-SGD flow via its period map.

The learning dynamics in continuous time are the damped oscillator

    thetaddot + alpha*thetadot + B(t)(theta - theta*) = 0,
    alpha = (1 - mu)/sqrt(eta),

written in phase space as xidot = A(t) xi with

    A(t) = [[0, I], [-B(t), -alpha*I]].

For B periodic with period T, integrating the fundamental solution
Psi(0)=I over one period gives the period map Psi(T); its spectral
radius rho decides everything: rho > 1 means every nontrivial solution
diverges exponentially (parametric resonance), rho < 1 means exponential
convergence to theta*.  ``theory_heatmap`` sweeps (mu, frequency) grids
of rho to draw stability charts.
"""

from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable

import numpy as np

from . import numerics
from .processes import CovariateProcess, Sinusoid, SquareWave
from .tasks import grad_matrix_from_mean
from .grids import HeatmapGrid

DIVERGES = "diverges"
CONVERGES = "converges"
MARGINAL = "marginal"

#: half-width of the rho band around 1 classified as marginal
MARGINAL_BAND = 0.02


def _block_A(B: np.ndarray, alpha: float) -> np.ndarray:
    d = B.shape[0]
    A = np.zeros((2 * d, 2 * d))
    A[:d, d:] = np.eye(d)
    A[d:, :d] = -B
    A[d:, d:] = -alpha * np.eye(d)
    return A


def assemble_A(
    Bfun: Callable[[float], np.ndarray], mu: float, eta: float
) -> Callable[[float], np.ndarray]:
    """Phase-space system matrix t -> [[0, I], [-B(t), -alpha*I]]."""
    if eta <= 0.0:
        raise ValueError(f"need eta > 0, got {eta}")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"need 0 <= mu <= 1, got {mu}")
    alpha = (1.0 - mu) / np.sqrt(eta)
    return lambda t: _block_A(np.asarray(Bfun(t), dtype=float), alpha)


@dataclass
class OscillatorSystem:
    """A periodic phase-space system ready for period-map integration.

    ``Bfun`` maps continuous time to the expected-gradient matrix;
    ``period_ct`` is the period in continuous time (sqrt(eta)/f for a
    sinusoidal mean at f cycles/step, sqrt(eta)*T for a square wave of
    period T steps).  ``mean_grid``, when set, evaluates the mean at an
    array of times in one call and enables the fast integration path.
    """

    Bfun: Callable[[float], np.ndarray]
    alpha: float
    dim: int
    period_ct: float
    mean_grid: Callable[[np.ndarray], np.ndarray] | None = None
    cov_scale: float = 1.0
    append_bias: bool = True

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError(f"need alpha >= 0, got {self.alpha}")
        if not self.period_ct > 0.0:
            raise ValueError(f"need period_ct > 0, got {self.period_ct}")

    def A(self, t: float) -> np.ndarray:
        return _block_A(np.asarray(self.Bfun(t), dtype=float), self.alpha)

    def validate_period(self, npoints: int = 100, tol: float = 1e-9) -> None:
        """Check Bfun(t) == Bfun(t + period_ct) on sampled t."""
        ts = np.linspace(0.0, self.period_ct, npoints, endpoint=False)
        for t in ts:
            if np.max(np.abs(self.Bfun(t) - self.Bfun(t + self.period_ct))) > tol:
                raise ValueError(f"Bfun is not period_ct-periodic at t={t:g}")

    @classmethod
    def from_process(
        cls, proc: CovariateProcess, mu: float, eta: float, validate: bool = True
    ) -> "OscillatorSystem":
        """System for momentum-SGD on a deterministic periodic process."""
        if not proc.mean.deterministic:
            raise ValueError("oscillator analysis needs a deterministic mean signal")
        steps = proc.mean.period_steps()
        if not np.isfinite(steps):
            raise ValueError("mean signal is aperiodic; no period map exists")
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"need 0 <= mu <= 1, got {mu}")
        if eta <= 0.0:
            raise ValueError(f"need eta > 0, got {eta}")
        sqe = np.sqrt(eta)

        def Bfun(t: float) -> np.ndarray:
            return grad_matrix_from_mean(
                proc.mean.mean_continuous(t, eta), proc.cov_scale, proc.append_bias
            )

        def mean_grid(ts: np.ndarray) -> np.ndarray:
            return np.stack([proc.mean.mean_continuous(t, eta) for t in ts])

        signal = proc.mean
        if isinstance(signal, Sinusoid):
            def mean_grid(ts: np.ndarray) -> np.ndarray:  # noqa: F811 vectorized form
                return (
                    signal.amplitude
                    * np.sin(2.0 * np.pi * signal.freq * np.asarray(ts) / sqe)
                )[:, None]
        elif isinstance(signal, SquareWave):
            def mean_grid(ts: np.ndarray) -> np.ndarray:  # noqa: F811
                phase = np.floor(2.0 * (np.asarray(ts) / sqe) / signal.period)
                sign = np.where(phase.astype(np.int64) % 2 == 0, 0.5, -0.5)
                return sign[:, None] * signal.direction[None, :]

        sys = cls(
            Bfun=Bfun,
            alpha=(1.0 - mu) / sqe,
            dim=proc.sample_dim,
            period_ct=sqe * steps,
            mean_grid=mean_grid,
            cov_scale=proc.cov_scale,
            append_bias=proc.append_bias,
        )
        if validate:
            sys.validate_period()
        return sys


def default_h(period_ct: float) -> float:
    """Default integration step: at least 1000 RK4 steps per period,
    and no coarser than 0.01 time units."""
    return period_ct / max(1000.0, 100.0 * period_ct)


def _B_stack(means: np.ndarray, cov_scale: float, append_bias: bool) -> np.ndarray:
    n, d = means.shape
    m = np.concatenate([means, np.ones((n, 1))], axis=1) if append_bias else means
    B = 2.0 * np.einsum("ni,nj->nij", m, m)
    B[:, :d, :d] += 2.0 * cov_scale * np.eye(d)
    return B


def monodromy(sys: OscillatorSystem, h_ode: float | None = None) -> np.ndarray:
    """Fundamental solution matrix after one period, Psi(period_ct).

    Whole-matrix classical RK4 from Psi(0) = I with a uniform step of
    (at most) ``h_ode``.  Integration blow-up raises
    :class:`numerics.IntegrationDiverged` (the system is too stiff for
    the step), never returning a silently wrong matrix.
    """
    T = sys.period_ct
    if h_ode is None:
        h_ode = default_h(T)
    if not 0.0 < h_ode <= T / 100.0:
        raise ValueError(f"need 0 < h_ode <= period_ct/100, got {h_ode}")
    if sys.mean_grid is None:
        return numerics.rk4_ltv(sys.A, np.eye(2 * sys.dim), 0.0, T, h_ode)

    nsteps = int(np.ceil(T / h_ode - 1e-12))
    h = T / nsteps
    # A(t) precomputed at every half-step node, vectorized over time
    ts = np.arange(2 * nsteps + 1) * (0.5 * h)
    B = _B_stack(sys.mean_grid(ts), sys.cov_scale, sys.append_bias)
    d = B.shape[1]
    A = np.zeros((len(ts), 2 * d, 2 * d))
    A[:, :d, d:] = np.eye(d)
    A[:, d:, :d] = -B
    A[:, d:, d:] = -sys.alpha * np.eye(d)
    psi = np.eye(2 * d)
    for i in range(nsteps):
        a0, a1, a2 = A[2 * i], A[2 * i + 1], A[2 * i + 2]
        k1 = a0 @ psi
        k2 = a1 @ (psi + 0.5 * h * k1)
        k3 = a1 @ (psi + 0.5 * h * k2)
        k4 = a2 @ (psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.isfinite(psi).all():
        raise numerics.IntegrationDiverged(T)
    return psi


@dataclass
class StabilityVerdict:
    rho: float
    label: str

    @classmethod
    def from_rho(cls, rho: float, marginal_band: float = MARGINAL_BAND) -> "StabilityVerdict":
        if abs(rho - 1.0) <= marginal_band:
            return cls(rho, MARGINAL)
        return cls(rho, DIVERGES if rho > 1.0 else CONVERGES)


def stability(
    sys: OscillatorSystem,
    h_ode: float | None = None,
    marginal_band: float = MARGINAL_BAND,
) -> StabilityVerdict:
    """Classify the system by the spectral radius of its period map."""
    rho = numerics.spectral_radius(numerics.eigvals(monodromy(sys, h_ode)))
    return StabilityVerdict.from_rho(rho, marginal_band)


@dataclass
class TheorySpec:
    """Process family for theory sweeps.

    ``kind`` is "sinusoid" (axis values are frequencies in cycles/step)
    or "square" (axis values are periods in steps; the wave direction is
    the first basis vector, which is general because the spectrum is
    invariant under rotations of the direction).
    """

    kind: str = "sinusoid"
    amplitude: float = 0.5
    cov_scale: float = 1.0
    dim: int = 1
    append_bias: bool = True

    def signal(self, axis_value: float):
        if self.kind == "sinusoid":
            return Sinusoid(self.amplitude, axis_value)
        if self.kind == "square":
            direction = np.zeros(self.dim)
            direction[0] = 1.0
            return SquareWave(int(round(axis_value)), direction)
        raise ValueError(f"unknown theory process kind {self.kind!r}")

    @property
    def axis_name(self) -> str:
        return "freq" if self.kind == "sinusoid" else "period"


def cell_rho(spec: TheorySpec, eta: float, mu: float, axis_value: float,
             h_ode: float | None = None) -> float:
    """Spectral radius for one (mu, frequency) cell.

    axis_value 0 is the iid cell: the system is autonomous, so rho is
    reported per unit continuous time from the exponential map.
    """
    if axis_value == 0.0:
        B = grad_matrix_from_mean(np.zeros(spec.dim), spec.cov_scale, spec.append_bias)
        A = _block_A(B, (1.0 - mu) / np.sqrt(eta))
        return numerics.spectral_radius(numerics.eigvals(numerics.expm(A, 1.0)))
    proc = CovariateProcess(spec.signal(axis_value), spec.cov_scale, spec.append_bias)
    sys = OscillatorSystem.from_process(proc, mu, eta, validate=False)
    return numerics.spectral_radius(numerics.eigvals(monodromy(sys, h_ode)))


def _cell_worker(args) -> float:
    spec, eta, mu, axis_value, h_ode = args
    try:
        return cell_rho(spec, eta, mu, axis_value, h_ode)
    except Exception:
        return float("nan")  # per-cell failure: recorded in-cell, sweep continues


def theory_heatmap(
    eta: float,
    mu_values,
    freq_values,
    spec: TheorySpec | None = None,
    h_ode: float | None = None,
    workers: int = 1,
) -> HeatmapGrid:
    """Grid of period-map spectral radii over (mu, frequency)."""
    spec = spec or TheorySpec()
    mu_values = np.asarray(mu_values, dtype=float)
    freq_values = np.asarray(freq_values, dtype=float)
    if mu_values.size == 0 or freq_values.size == 0:
        raise ValueError("empty sweep axis")
    jobs = [
        (spec, eta, mu, f, h_ode) for mu in mu_values for f in freq_values
    ]
    if workers > 1:
        with Pool(workers) as pool:
            flat = pool.map(_cell_worker, jobs, chunksize=4)
    else:
        flat = [_cell_worker(j) for j in jobs]
    values = np.asarray(flat).reshape(mu_values.size, freq_values.size)
    return HeatmapGrid(
        "mu", mu_values, spec.axis_name, freq_values, values,
        provenance=f"theory rho (eta={eta})",
    )

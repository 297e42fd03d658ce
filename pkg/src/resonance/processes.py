"""Synthetic covariate-shift processes.

A process is a mean sequence {xbar_k} plus Gaussian sampling around it,
X_k ~ N(xbar_k, c*I).  Four mean-sequence families are provided, each
tunable by a single frequency parameter (f in cycles/step, or a period /
switching interval T in steps):

* ``Sinusoid``   - deterministic scalar amplitude*sin(2*pi*f*k)
* ``Ar2``        - stochastic scalar AR(2) tuned to a target frequency
                   peak and stationary variance
* ``SquareWave`` - deterministic vector flipping between +-direction/2
* ``Switching``  - piecewise-constant vector mean redrawn every T steps

Setting f=0 or T=0 gives the iid baseline of each family: a constant
zero mean, except for ``Switching`` where T=0 means every sample is an
independent draw from the stationary law N(0, (v+c)*I) (a frozen zero
mean would never visit the stationary distribution's support).

Stochastic signals are single-owner streams: queries must come with
nondecreasing step index k, and they consume their ``Rng`` in k-order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import Rng


def ar2_coeffs(f: float, target_var: float, innovation_var: float) -> tuple[float, float]:
    """AR(2) coefficients with a spectral peak at f and a pinned variance.

    phi1 follows the closed form phi1 = 4*phi2/(phi2-1) * cos(2*pi*f);
    phi2 is found by bisection on the stationary-variance identity

        var = innovation_var*(1-phi2) / ((1+phi2)*((1-phi2)^2 - phi1^2))

    over phi2 in (-1, 0), to |residual| < 1e-12*target_var.  The returned
    pair satisfies the stationarity triangle.
    """
    if not 0.0 < f < 0.25:
        raise ValueError(f"need 0 < f < 0.25, got f={f}")
    if not target_var > innovation_var > 0.0:
        raise ValueError(
            f"need target_var > innovation_var > 0, got {target_var}, {innovation_var}"
        )
    cos2pf = np.cos(2.0 * np.pi * f)

    def phi1_of(p2: float) -> float:
        return 4.0 * p2 / (p2 - 1.0) * cos2pf

    def residual(p2: float) -> float:
        p1 = phi1_of(p2)
        denom = (1.0 + p2) * ((1.0 - p2) ** 2 - p1 * p1)
        return innovation_var * (1.0 - p2) / denom - target_var

    lo, hi = -1.0 + 1e-14, -1e-14
    rlo, rhi = residual(lo), residual(hi)
    if not (rlo > 0.0 > rhi):
        raise ValueError(
            f"no AR(2) variance root in (-1, 0) for f={f}, "
            f"target_var={target_var}, innovation_var={innovation_var}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) < 1e-12 * target_var:
            lo = hi = mid
            break
        if r > 0.0:
            lo = mid
        else:
            hi = mid
    p2 = 0.5 * (lo + hi)
    p1 = phi1_of(p2)
    if not (abs(p2) < 1.0 and p2 - p1 < 1.0 and p1 + p2 < 1.0):
        raise ValueError(
            f"AR(2) root violates stationarity for f={f}: phi1={p1}, phi2={p2}"
        )
    return p1, p2


def _step_coordinate(t: float, eta: float) -> float:
    """Continuous step index s = t/sqrt(eta), snapped to the nearest
    integer when within rounding error of one.

    The snap makes the sampling relation mean_continuous(sqrt(eta)*k) ==
    mean_at(k) hold exactly (the float round-trip is otherwise off by an
    ulp, which would also misclassify square-wave edges).
    """
    s = t / np.sqrt(eta)
    k = np.round(s)
    if abs(s - k) <= 1e-9 * max(1.0, abs(s)):
        return float(k)
    return float(s)


class MeanSignal:
    """Base interface for mean sequences."""

    dim: int = 1
    deterministic: bool = False
    #: Switching with T=0 replaces per-step means with per-sample iid draws.
    iid_per_sample: bool = False

    def mean_at(self, k: int, rng: Rng | None = None) -> np.ndarray:
        raise NotImplementedError

    def mean_continuous(self, t: float, eta: float) -> np.ndarray:
        """Continuous-time embedding with mean_continuous(sqrt(eta)*k) == mean_at(k)."""
        raise ValueError(f"{type(self).__name__} has no deterministic embedding")

    def period_steps(self) -> float:
        """Period of the mean sequence in step units (inf if aperiodic)."""
        return float("inf")

    def reset(self) -> None:
        """Forget stream state so a fresh Rng reproduces the sequence."""

    def _check_k(self, k: int, floor: int) -> None:
        if k < floor:
            raise ValueError(
                f"stochastic mean queried at k={k} after k={floor - 1}; "
                "calls must use nondecreasing k"
            )


@dataclass
class Sinusoid(MeanSignal):
    """Scalar mean amplitude*sin(2*pi*f*k); f=0 degenerates to zero."""

    amplitude: float
    freq: float

    deterministic = True
    dim = 1

    def __post_init__(self):
        if not 0.0 <= self.freq < 0.5:
            raise ValueError(f"need 0 <= f < 0.5, got {self.freq}")

    def mean_at(self, k: int, rng: Rng | None = None) -> np.ndarray:
        return np.array([self.amplitude * np.sin(2.0 * np.pi * self.freq * k)])

    def mean_continuous(self, t: float, eta: float) -> np.ndarray:
        s = _step_coordinate(t, eta)
        return np.array([self.amplitude * np.sin(2.0 * np.pi * self.freq * s)])

    def period_steps(self) -> float:
        return float("inf") if self.freq == 0.0 else 1.0 / self.freq


@dataclass
class Ar2(MeanSignal):
    """Scalar AR(2) mean with innovations ~ N(0, innovation_var).

    Coefficients come from :func:`ar2_coeffs`; the first two values are
    drawn from the stationary marginal N(0, target_var).  f=0 degenerates
    to the constant zero mean and consumes no randomness.
    """

    freq: float
    target_var: float
    innovation_var: float
    phi1: float = field(init=False, default=0.0)
    phi2: float = field(init=False, default=0.0)

    deterministic = False
    dim = 1

    def __post_init__(self):
        if self.freq > 0.0:
            self.phi1, self.phi2 = ar2_coeffs(
                self.freq, self.target_var, self.innovation_var
            )
        self.reset()

    def reset(self) -> None:
        self._next_k = 0
        self._prev = 0.0
        self._prev2 = 0.0
        self._current = 0.0

    def mean_at(self, k: int, rng: Rng | None = None) -> np.ndarray:
        if self.freq == 0.0:
            return np.zeros(1)
        self._check_k(k, self._next_k - 1)
        while self._next_k <= k:
            if self._next_k < 2:
                value = float(rng.normals()) * np.sqrt(self.target_var)
            else:
                value = (
                    self.phi1 * self._prev
                    + self.phi2 * self._prev2
                    + float(rng.normals()) * np.sqrt(self.innovation_var)
                )
            self._prev2, self._prev = self._prev, value
            self._current = value
            self._next_k += 1
        return np.array([self._current])


@dataclass
class SquareWave(MeanSignal):
    """Vector mean flipping between +direction/2 and -direction/2.

    The sign is + while floor(2k/T) is even, - while odd, giving a square
    wave of period T steps.  T=0 degenerates to the constant zero mean.
    """

    period: int
    direction: np.ndarray

    deterministic = True

    def __post_init__(self):
        self.period = int(self.period)
        if self.period < 0:
            raise ValueError(f"need period >= 0, got {self.period}")
        self.direction = np.asarray(self.direction, dtype=float)
        self.dim = self.direction.size

    def _sign_from_phase(self, phase: int) -> float:
        return 0.5 if phase % 2 == 0 else -0.5

    def mean_at(self, k: int, rng: Rng | None = None) -> np.ndarray:
        if self.period == 0:
            return np.zeros(self.dim)
        return self._sign_from_phase(int(2 * k // self.period)) * self.direction

    def mean_continuous(self, t: float, eta: float) -> np.ndarray:
        if self.period == 0:
            return np.zeros(self.dim)
        s = _step_coordinate(t, eta)
        return self._sign_from_phase(int(np.floor(2.0 * s / self.period))) * self.direction

    def period_steps(self) -> float:
        return float("inf") if self.period == 0 else float(self.period)


@dataclass
class Switching(MeanSignal):
    """Piecewise-constant vector mean, redrawn ~ N(0, v*I) every T steps.

    T=0 is the iid-from-stationary baseline: the mean is redrawn for
    every individual sample (see ``CovariateProcess.sample``), so the
    covariates are iid N(0, (v+c)*I).
    """

    interval: int
    variance: float
    dim: int

    deterministic = False

    def __post_init__(self):
        self.interval = int(self.interval)
        if self.interval < 0:
            raise ValueError(f"need interval >= 0, got {self.interval}")
        if self.variance < 0.0:
            raise ValueError(f"need variance >= 0, got {self.variance}")
        self.iid_per_sample = self.interval == 0
        self.reset()

    def reset(self) -> None:
        self._next_interval = 0
        self._last_k = -1
        self._value = np.zeros(self.dim)

    def _draw(self, rng: Rng) -> np.ndarray:
        return rng.normals(self.dim) * np.sqrt(self.variance)

    def mean_at(self, k: int, rng: Rng | None = None) -> np.ndarray:
        self._check_k(k, self._last_k)
        self._last_k = k
        if self.interval == 0:
            # fresh mean at every query: iid stationary sampling
            self._value = self._draw(rng)
            return self._value
        i = k // self.interval
        while self._next_interval <= i:
            self._value = self._draw(rng)
            self._next_interval += 1
        return self._value


@dataclass
class CovariateProcess:
    """Gaussian covariates X_k ~ N(mean_at(k), cov_scale * I).

    ``append_bias`` adds a trailing exact-1.0 coordinate to every sample
    (and to the mean), for regression models with a bias weight.
    """

    mean: MeanSignal
    cov_scale: float
    append_bias: bool = True

    def __post_init__(self):
        if self.cov_scale < 0.0:
            raise ValueError(f"need cov_scale >= 0, got {self.cov_scale}")

    @property
    def dim(self) -> int:
        return self.mean.dim

    @property
    def sample_dim(self) -> int:
        return self.mean.dim + (1 if self.append_bias else 0)

    def stationary_var(self) -> float:
        """Per-coordinate variance of the stationary covariate law."""
        v = self.mean.variance if isinstance(self.mean, Switching) else 0.0
        return v + self.cov_scale

    def mean_at(self, k: int, rng: Rng | None = None) -> np.ndarray:
        return self.mean.mean_at(k, rng)

    def sample(self, k: int, n: int, rng: Rng) -> np.ndarray:
        """n draws of X_k, shape (n, sample_dim)."""
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        d = self.mean.dim
        if self.mean.iid_per_sample:
            x = rng.normals((n, d)) * np.sqrt(self.stationary_var())
        else:
            m = self.mean.mean_at(k, rng)
            if self.cov_scale == 0.0:
                x = np.tile(m, (n, 1))
            else:
                x = m + rng.normals((n, d)) * np.sqrt(self.cov_scale)
        if self.append_bias:
            x = np.concatenate([x, np.ones((n, 1))], axis=1)
        return x


def psd(series, segment_len: int, overlap: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Welch power spectral density of a scalar series.

    Hann-windowed overlapping segments, averaged periodograms, one-sided
    density normalization at unit sample rate.  Frequencies are in
    cycles/step on [0, 0.5].
    """
    x = np.asarray(series, dtype=float).ravel()
    if segment_len < 16:
        raise ValueError(f"need segment_len >= 16, got {segment_len}")
    if x.size < segment_len:
        raise ValueError(f"series length {x.size} shorter than segment {segment_len}")
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"need 0 <= overlap < 1, got {overlap}")
    L = int(segment_len)
    step = L - int(overlap * L)
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(L) / L)  # periodic Hann
    scale = 1.0 / (w * w).sum()
    nseg = 1 + (x.size - L) // step
    acc = np.zeros(L // 2 + 1)
    for s in range(nseg):
        seg = x[s * step : s * step + L]
        spec = np.fft.rfft(w * seg)
        acc += (spec.real ** 2 + spec.imag ** 2) * scale
    acc /= nseg
    # fold two-sided density into one side (DC and Nyquist not doubled)
    if L % 2 == 0:
        acc[1:-1] *= 2.0
    else:
        acc[1:] *= 2.0
    freqs = np.fft.rfftfreq(L, d=1.0)
    return freqs, acc

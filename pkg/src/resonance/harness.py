"""Experiment harness: configs, run engines, sweeps, and serialization.

An :class:`ExperimentConfig` pins every knob of one experiment family;
presets reproduce the six study configurations (sinusoidal and AR(2)
heatmaps, square-wave sample-count ablation, switching-mean variance and
dimension sweeps, ADAM, and the ReLU network) plus the damping variants.

A sweep enumerates cells over one or two axes; each (cell, run) gets an
independent random stream derived from (base_seed, cell index, run
index), so results are reproducible and independent of scheduling.  The
per-run metric is the distance ||theta_k - theta*|| averaged over the
final ``window`` steps (mean test loss for the network model); runs that
blow past ``DIVERGENCE_CAP`` are frozen and report the cap.

Per run, the stream is consumed in a fixed order: target weights, then
initial weights, then (square wave only) the direction vector, then the
whole mean sequence in step order, then sampling noise, then label
noise.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np

from . import mlp as mlpmod
from .grids import HeatmapGrid, contour_lines
from .optim import DIVERGENCE_CAP, AdamState, SgdmState, adam_step, sgdm_step
from .processes import Ar2, CovariateProcess, Sinusoid, SquareWave, Switching
from .rng import Rng, derive_seed

AXIS_FIELDS = (
    "mu", "freq", "period", "mean_variance", "dim", "samples_per_step", "beta1",
)


@dataclass
class ExperimentConfig:
    experiment: str
    process: str = "sinusoid"        # sinusoid | ar2 | square | switching
    optimizer: str = "sgdm"          # sgdm | adam
    model: str = "linear"            # linear | mlp
    eta: float = 0.01
    mu: float = 0.95
    beta1: float = 0.9
    beta2: float = 0.999
    freq: float = 0.0                # cycles/step (sinusoid, ar2)
    period: int = 0                  # steps (square, switching interval)
    dim: int = 1
    cov_scale: float = 1.0
    mean_variance: float = 0.25      # switching mean variance v
    amplitude: float = 0.5           # sinusoid amplitude
    ar2_target_var: float = 0.1
    ar2_innovation_var: float = 1e-5
    noise_var: float = 0.0
    theta_dist: str = "uniform"      # uniform[-1,1] | normal N(0, theta_scale*I)
    theta_scale: float = 0.25
    samples_per_step: int = 20
    steps: int = 10_000
    window: int = 500
    runs: int = 10
    base_seed: int = 2024
    test_points: int = 2048          # network model only
    axis1: tuple | None = None       # (field_name, [values])
    axis2: tuple | None = None

    def __post_init__(self):
        for name in ("axis1", "axis2"):
            ax = getattr(self, name)
            if ax is not None:
                fieldname, values = ax
                if fieldname not in AXIS_FIELDS:
                    raise ValueError(f"unknown sweep axis {fieldname!r}")
                setattr(self, name, (fieldname, list(values)))
        if self.window > self.steps:
            raise ValueError(f"window {self.window} exceeds steps {self.steps}")

    def cells(self) -> list[dict]:
        """Cell assignments in axis1-major order."""
        a1 = self.axis1 or (None, [None])
        a2 = self.axis2 or (None, [None])
        out = []
        for v1 in a1[1]:
            for v2 in a2[1]:
                cell = {}
                if a1[0] is not None:
                    cell[a1[0]] = v1
                if a2[0] is not None:
                    cell[a2[0]] = v2
                out.append(cell)
        return out

    def with_cell(self, cell: dict) -> "ExperimentConfig":
        clean = {}
        for k, v in cell.items():
            if k in ("period", "dim", "samples_per_step"):
                v = int(round(v))
                if k == "period" and v < 0:
                    raise ValueError(f"negative period {v}")
            clean[k] = v
        return dataclasses.replace(self, axis1=None, axis2=None, **clean)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        for name in ("axis1", "axis2"):
            if raw.get(name) is not None:
                raw[name] = tuple(raw[name])
        return cls(**raw)


@dataclass
class RunRecord:
    experiment: str
    mu: float
    eta: float
    freq_or_period: float
    variance: float
    dim: int
    samples_per_step: int
    beta1: float | None
    seed: int
    metric: float
    diverged: bool
    diverge_step: int
    wall_time: float = 0.0
    cell_index: int = 0


def build_process(cfg: ExperimentConfig, rng: Rng) -> CovariateProcess:
    """Covariate process for one run (consumes rng for the square-wave
    direction, which is redrawn per run)."""
    bias = cfg.model == "linear"
    if cfg.process == "sinusoid":
        signal = Sinusoid(cfg.amplitude, cfg.freq)
    elif cfg.process == "ar2":
        signal = Ar2(cfg.freq, cfg.ar2_target_var, cfg.ar2_innovation_var)
    elif cfg.process == "square":
        if cfg.period > 0:
            xi = rng.normals(cfg.dim)
            direction = xi / np.linalg.norm(xi)
        else:
            direction = np.zeros(cfg.dim)
        signal = SquareWave(cfg.period, direction)
    elif cfg.process == "switching":
        signal = Switching(cfg.period, cfg.mean_variance, cfg.dim)
    else:
        raise ValueError(f"unknown process {cfg.process!r}")
    return CovariateProcess(signal, cfg.cov_scale, append_bias=bias)


def _draw_theta(cfg: ExperimentConfig, rng: Rng, size: int) -> np.ndarray:
    if cfg.theta_dist == "uniform":
        return rng.uniform(-1.0, 1.0, size)
    if cfg.theta_dist == "normal":
        return rng.normals(size) * np.sqrt(cfg.theta_scale)
    raise ValueError(f"unknown theta_dist {cfg.theta_dist!r}")


def _presample(proc: CovariateProcess, cfg: ExperimentConfig, rng: Rng):
    """Mean sequence, covariate block, and per-step design, in stream order."""
    K, n, d = cfg.steps, cfg.samples_per_step, proc.dim
    signal = proc.mean
    if signal.iid_per_sample:
        x = rng.normals((K, n, d)) * np.sqrt(proc.stationary_var())
    else:
        means = np.empty((K, d))
        for k in range(K):
            means[k] = signal.mean_at(k, rng)
        if proc.cov_scale == 0.0:
            x = np.broadcast_to(means[:, None, :], (K, n, d)).copy()
        else:
            x = means[:, None, :] + rng.normals((K, n, d)) * np.sqrt(proc.cov_scale)
    if proc.append_bias:
        x = np.concatenate([x, np.ones((K, n, 1))], axis=2)
    return x


def _run_linear(cfg: ExperimentConfig, rng: Rng):
    D = cfg.dim + 1
    theta_star = _draw_theta(cfg, rng, D)
    theta0 = _draw_theta(cfg, rng, D)
    proc = build_process(cfg, rng)
    x = _presample(proc, cfg, rng)
    K, n = cfg.steps, cfg.samples_per_step
    y = x @ theta_star
    if cfg.noise_var > 0.0:
        y = y + rng.normals((K, n)) * np.sqrt(cfg.noise_var)
    # per-step sufficient statistics of the mean batch gradient:
    # grad(theta) = G[k] @ theta - b[k] with G = (2/n) X^T X, b = (2/n) X^T y
    G = (2.0 / n) * np.einsum("kni,knj->kij", x, x)
    b = (2.0 / n) * np.einsum("kni,kn->ki", x, y)

    if cfg.optimizer == "sgdm":
        state = SgdmState(theta0, eta=cfg.eta, mu=cfg.mu)
        step_fn = sgdm_step
    elif cfg.optimizer == "adam":
        state = AdamState(theta0, eta=cfg.eta, beta1=cfg.beta1, beta2=cfg.beta2)
        step_fn = adam_step
    else:
        raise ValueError(f"unknown optimizer {cfg.optimizer!r}")

    dists = np.empty(K)
    for k in range(K):
        grad = G[k] @ state.theta - b[k]
        step_fn(state, grad)
        if state.diverged:
            return DIVERGENCE_CAP, True, state.diverge_step
        diff = state.theta - theta_star
        dists[k] = np.sqrt(diff @ diff)
    return float(dists[K - cfg.window :].mean()), False, -1


def _run_mlp(cfg: ExperimentConfig, rng: Rng):
    params = mlpmod.he_init(cfg.dim, rng)
    proc = build_process(cfg, rng)
    x_test = rng.normals((cfg.test_points, cfg.dim)) * np.sqrt(proc.stationary_var())
    y_test = np.cos(np.pi * np.linalg.norm(x_test, axis=1))
    x = _presample(proc, cfg, rng)
    K, n = cfg.steps, cfg.samples_per_step
    y = np.cos(np.pi * np.linalg.norm(x, axis=2))
    if cfg.noise_var > 0.0:
        y = y + rng.normals((K, n)) * np.sqrt(cfg.noise_var)

    mu, eta = cfg.mu, cfg.eta
    vel_w = [np.zeros_like(w) for w in params.weights]
    vel_b = [np.zeros_like(bb) for bb in params.biases]
    losses = np.empty(K)
    cap2 = DIVERGENCE_CAP * DIVERGENCE_CAP
    for k in range(K):
        gw, gb = mlpmod.grad(params, x[k], y[k])
        norm2 = 0.0
        for i in range(len(params.weights)):
            vel_w[i] = mu * vel_w[i] - eta * gw[i]
            params.weights[i] = params.weights[i] + vel_w[i]
            vel_b[i] = mu * vel_b[i] - eta * gb[i]
            params.biases[i] = params.biases[i] + vel_b[i]
            norm2 += float((params.weights[i] * params.weights[i]).sum())
            norm2 += float((params.biases[i] * params.biases[i]).sum())
        if not np.isfinite(norm2) or norm2 > cap2:
            return DIVERGENCE_CAP, True, k
        if k >= K - cfg.window:
            resid = mlpmod.forward(params, x_test) - y_test
            losses[k] = float(resid @ resid) / resid.size
    return float(losses[K - cfg.window :].mean()), False, -1


def _freq_or_period(cfg: ExperimentConfig) -> float:
    return cfg.freq if cfg.process in ("sinusoid", "ar2") else float(cfg.period)


def _variance_of(cfg: ExperimentConfig) -> float:
    if cfg.process == "switching":
        return cfg.mean_variance
    if cfg.process == "ar2":
        return cfg.ar2_target_var
    return cfg.cov_scale


def run_cell(cfg: ExperimentConfig, cell: dict, cell_index: int, seed_index: int) -> RunRecord:
    """One run; deterministic given (config, cell, base_seed, indices)."""
    sub = cfg.with_cell(cell)
    rng = Rng(derive_seed(cfg.base_seed, cell_index, seed_index))
    start = time.perf_counter()
    engine = _run_mlp if sub.model == "mlp" else _run_linear
    metric, diverged, diverge_step = engine(sub, rng)
    return RunRecord(
        experiment=sub.experiment,
        mu=sub.mu,
        eta=sub.eta,
        freq_or_period=_freq_or_period(sub),
        variance=_variance_of(sub),
        dim=sub.dim,
        samples_per_step=sub.samples_per_step,
        beta1=sub.beta1 if sub.optimizer == "adam" else None,
        seed=seed_index,
        metric=metric,
        diverged=diverged,
        diverge_step=diverge_step,
        wall_time=time.perf_counter() - start,
        cell_index=cell_index,
    )


def _job(args) -> RunRecord:
    cfg, cell, cell_index, seed_index = args
    return run_cell(cfg, cell, cell_index, seed_index)


def sweep(cfg: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """All (cell, run) records, sorted by (cell, seed) regardless of
    scheduling, so worker count never changes the output."""
    jobs = [
        (cfg, cell, ci, si)
        for ci, cell in enumerate(cfg.cells())
        for si in range(cfg.runs)
    ]
    if workers > 1:
        with Pool(workers) as pool:
            records = pool.map(_job, jobs, chunksize=1)
    else:
        records = [_job(j) for j in jobs]
    records.sort(key=lambda r: (r.cell_index, r.seed))
    return records


def aggregate(cfg: ExperimentConfig, records: list[RunRecord]) -> np.ndarray:
    """Mean capped metric per cell, in cell order."""
    ncells = len(cfg.cells())
    sums = np.zeros(ncells)
    counts = np.zeros(ncells, dtype=int)
    for r in records:
        sums[r.cell_index] += r.metric
        counts[r.cell_index] += 1
    if (counts == 0).any():
        raise ValueError("missing records for some cells")
    return sums / counts


def empirical_heatmap(cfg: ExperimentConfig, workers: int = 1):
    """Seed-averaged metric over a 2-axis sweep.

    Returns (grid, records); the grid holds raw metric means (log scaling
    is applied at render time).
    """
    if cfg.axis1 is None or cfg.axis2 is None:
        raise ValueError("empirical_heatmap needs a 2-axis sweep")
    records = sweep(cfg, workers)
    means = aggregate(cfg, records)
    n1, n2 = len(cfg.axis1[1]), len(cfg.axis2[1])
    grid = HeatmapGrid(
        cfg.axis1[0], np.asarray(cfg.axis1[1], dtype=float),
        cfg.axis2[0], np.asarray(cfg.axis2[1], dtype=float),
        means.reshape(n1, n2),
        provenance=f"empirical {cfg.experiment}",
    )
    return grid, records


def sweep_curve(cfg: ExperimentConfig, workers: int = 1):
    """1- or 2-axis sweep reduced to (cells, mean metric, records)."""
    records = sweep(cfg, workers)
    return cfg.cells(), aggregate(cfg, records), records


def theory_overlay(empirical: HeatmapGrid, theory: HeatmapGrid, levels=(1.0,)):
    """Contours of the theory grid at the given levels, for plotting on
    top of the empirical heatmap.  Axes must match."""
    if not empirical.same_axes(theory):
        raise ValueError("empirical and theory grids have different axes")
    out = []
    for level in levels:
        out.extend(contour_lines(theory, level))
    return out


def agreement_score(
    theory: HeatmapGrid,
    cfg: ExperimentConfig,
    records: list[RunRecord],
    hot: float = 1.05,
    cold: float = 0.9,
    converge_below: float = 1.0,
):
    """Theory/empirics agreement on a shared (mu, freq) grid.

    A hot cell (rho > hot) agrees when every seed diverged; a cold cell
    (rho < cold) agrees when every seed's metric is below
    ``converge_below``.  Returns per-class (agreeing, total) counts.
    """
    ncells = theory.values.size
    by_cell: dict[int, list[RunRecord]] = {}
    for r in records:
        by_cell.setdefault(r.cell_index, []).append(r)
    if len(by_cell) != ncells:
        raise ValueError("records do not cover the theory grid")
    rho_flat = theory.values.ravel()
    hot_ok = hot_total = cold_ok = cold_total = 0
    for ci, rho in enumerate(rho_flat):
        runs = by_cell[ci]
        if rho > hot:
            hot_total += 1
            hot_ok += all(r.diverged for r in runs)
        elif rho < cold:
            cold_total += 1
            cold_ok += all(r.metric < converge_below for r in runs)
    return {
        "hot_agree": hot_ok, "hot_total": hot_total,
        "cold_agree": cold_ok, "cold_total": cold_total,
    }


def write_csv(records: list[RunRecord], path) -> None:
    """Run records as CSV (UTF-8, LF, full-precision floats).

    Columns: experiment,mu,eta,freq_or_period,variance,dim,
    samples_per_step,beta1,seed,metric,diverged,diverge_step.  beta1 is
    empty for non-ADAM runs; diverge_step is empty unless diverged.
    """
    lines = [
        "experiment,mu,eta,freq_or_period,variance,dim,"
        "samples_per_step,beta1,seed,metric,diverged,diverge_step"
    ]
    for r in records:
        beta1 = "" if r.beta1 is None else repr(float(r.beta1))
        dstep = repr(int(r.diverge_step)) if r.diverged else ""
        lines.append(
            f"{r.experiment},{float(r.mu)!r},{float(r.eta)!r},"
            f"{float(r.freq_or_period)!r},{float(r.variance)!r},{int(r.dim)},"
            f"{int(r.samples_per_step)},{beta1},{int(r.seed)},"
            f"{float(r.metric)!r},{int(r.diverged)},{dstep}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# experiment presets


def _span(lo: float, hi: float, count: int) -> list[float]:
    return list(np.linspace(lo, hi, count))


def _int_span(lo: int, hi: int, step: int) -> list[int]:
    return list(range(lo, hi + 1, step))


def exp1(mu_points: int = 60, freq_points: int = 60) -> ExperimentConfig:
    """Sinusoidal covariate shift, regression in two weights."""
    return ExperimentConfig(
        experiment="exp1", process="sinusoid", cov_scale=1.0, amplitude=0.5,
        dim=1, noise_var=0.0, theta_dist="uniform", samples_per_step=20,
        steps=10_000, window=500, runs=10, eta=0.01,
        axis1=("mu", _span(0.95, 0.999, mu_points)),
        axis2=("freq", _span(0.0, 0.05, freq_points)),
    )


def exp2(mu_points: int = 60, freq_points: int = 60) -> ExperimentConfig:
    """AR(2) stochastic mean tuned to the sinusoid's frequency peak."""
    cfg = exp1(mu_points, freq_points)
    return dataclasses.replace(
        cfg, experiment="exp2", process="ar2",
        ar2_target_var=0.1, ar2_innovation_var=1e-5,
    )


def exp3() -> ExperimentConfig:
    """Square wave in R^5; sample count ablated from 5 to 1."""
    return ExperimentConfig(
        experiment="exp3", process="square", dim=5, cov_scale=0.25,
        noise_var=0.1, theta_dist="normal", theta_scale=0.25,
        mu=0.95, eta=0.01, steps=10_000, window=500, runs=10,
        axis1=("samples_per_step", [1, 2, 3, 4, 5]),
        axis2=("period", _int_span(0, 120, 3)),
    )


def exp4(variant: str = "variance") -> ExperimentConfig:
    """Switching mean; sensitivity to the mean variance v or to dim."""
    if variant == "variance":
        axis1 = ("mean_variance", [0.1, 0.25, 0.4])
    elif variant == "dim":
        axis1 = ("dim", [1, 5, 9])
    else:
        raise ValueError(f"unknown exp4 variant {variant!r}")
    return ExperimentConfig(
        experiment="exp4", process="switching", dim=5, cov_scale=0.25,
        mean_variance=0.25, noise_var=0.1, theta_dist="normal",
        theta_scale=0.25, mu=0.95, eta=0.01, samples_per_step=1,
        steps=10_000, window=500, runs=10,
        axis1=axis1, axis2=("period", _int_span(0, 50, 2)),
    )


def exp5() -> ExperimentConfig:
    """Switching mean optimized with ADAM; beta1 sensitivity."""
    return ExperimentConfig(
        experiment="exp5", process="switching", optimizer="adam",
        dim=5, cov_scale=0.1, mean_variance=1.0, noise_var=0.1,
        theta_dist="normal", theta_scale=0.25, eta=0.01, beta2=0.999,
        samples_per_step=1, steps=10_000, window=2000, runs=10,
        axis1=("beta1", [0.9, 0.95, 0.99]),
        axis2=("period", _int_span(0, 100, 5)),
    )


def exp6() -> ExperimentConfig:
    """ReLU network fitting cos(pi*||x||) under switching covariates."""
    return ExperimentConfig(
        experiment="exp6", process="switching", model="mlp", dim=2,
        cov_scale=0.1, mean_variance=0.4, noise_var=0.1, mu=0.95,
        eta=0.01, samples_per_step=10, steps=20_000, window=2000,
        runs=20,
        axis1=("mean_variance", [0.1, 0.25, 0.4]),
        axis2=("period", _int_span(0, 100, 5)),
    )


def a2_momentum() -> ExperimentConfig:
    """Peak-resonance switching config re-run at reduced momentum."""
    cfg = exp4("variance")
    return dataclasses.replace(
        cfg, experiment="a2_momentum", mean_variance=0.4, runs=5,
        axis1=("mu", [0.85, 0.9, 0.95]),
    )


def a2_stepsize(eta: float = 0.001, mu_points: int = 30, freq_points: int = 30) -> ExperimentConfig:
    """Sinusoid grid at a reduced step size (compare against exp1)."""
    cfg = exp1(mu_points, freq_points)
    return dataclasses.replace(cfg, experiment="a2_stepsize", eta=eta)


def a3_stochastic(mu_points: int = 30, freq_points: int = 30) -> ExperimentConfig:
    """Fully stochastic gradients: the sinusoid grid at one sample/step."""
    cfg = exp1(mu_points, freq_points)
    return dataclasses.replace(cfg, experiment="a3_stochastic", samples_per_step=1)


PRESETS = {
    "exp1": exp1, "exp2": exp2, "exp3": exp3, "exp4": exp4, "exp5": exp5,
    "exp6": exp6, "a2_momentum": a2_momentum, "a2_stepsize": a2_stepsize,
    "a3_stochastic": a3_stochastic,
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown experiment {name!r}; have {sorted(PRESETS)}")
    return PRESETS[name]()

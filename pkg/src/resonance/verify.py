"""Self-check battery: oracle and property suites runnable from the CLI.

Each check is an independent, deterministic experiment with a hard
pass/fail threshold.  The fast set covers the numerical oracles
(splitting equivalence, period-map vs. matrix-exponential, spectral
targeting, Monte-Carlo gradient consistency, network gradients); the
full set adds the slow empirical suites that re-measure the resonance
phenomenology end to end.  The acceptance tests assert exactly these
checks.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from . import floquet, harness, mlp as mlpmod
from .numerics import eigvals, expm, spectral_radius
from .optim import DIVERGENCE_CAP, SgdmState, sgdm_step, split_step
from .processes import Ar2, Sinusoid, psd
from .rng import Rng
from .tasks import grad_matrix_from_mean

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.detail} [{self.seconds:.1f}s]"


def _timed(fn):
    def wrapper(*args, **kwargs) -> CheckResult:
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.seconds = time.perf_counter() - start
        return result
    return wrapper


@_timed
def splitting_equivalence() -> CheckResult:
    """Split-operator phase step reproduces momentum SGD on the same
    expected-gradient path: max componentwise gap <= 1e-10 over 1e3 steps."""
    mu, eta, freq = 0.95, 0.01, 0.01
    signal = Sinusoid(0.5, freq)
    rng = Rng(7)
    theta_star = rng.uniform(-1.0, 1.0, 2)
    theta0 = rng.uniform(-1.0, 1.0, 2)
    state = SgdmState(theta0.copy(), eta=eta, mu=mu)
    xi = np.concatenate([theta0 - theta_star, np.zeros(2)])
    worst = 0.0
    for k in range(1000):
        B = grad_matrix_from_mean(signal.mean_at(k), 1.0, True)
        sgdm_step(state, B @ (state.theta - theta_star))
        xi = split_step(xi, B, mu, eta)
        worst = max(worst, float(np.max(np.abs(xi[:2] + theta_star - state.theta))))
    return CheckResult(
        "splitting-equivalence", worst <= 1e-10,
        f"max |theta_split - theta_sgdm| = {worst:.3e} (<= 1e-10)",
    )


@_timed
def period_map_oracle() -> CheckResult:
    """Period-map spectral radius vs. the exponential map on 50 random
    constant systems (1e-6 relative), plus the closed-form damped case."""
    rng = Rng(11)
    worst = 0.0
    for _ in range(50):
        d = 2
        lams = rng.uniform(0.5, 4.0, d)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        R = np.array([[np.cos(angle), -np.sin(angle)],
                      [np.sin(angle), np.cos(angle)]])
        B = R @ np.diag(lams) @ R.T
        alpha = rng.uniform(0.1, 2.0)
        sys = floquet.OscillatorSystem(
            Bfun=lambda t, B=B: B, alpha=alpha, dim=d, period_ct=1.0)
        rho_psi = spectral_radius(eigvals(floquet.monodromy(sys)))
        rho_exp = spectral_radius(eigvals(expm(sys.A(0.0), 1.0)))
        worst = max(worst, abs(rho_psi - rho_exp) / rho_exp)
    B = grad_matrix_from_mean(np.zeros(1), 1.0, True)  # = 2*I
    sys = floquet.OscillatorSystem(
        Bfun=lambda t: B, alpha=(1.0 - 0.95) / np.sqrt(0.01), dim=2, period_ct=1.0)
    rho = spectral_radius(eigvals(floquet.monodromy(sys)))
    closed = float(np.exp(-0.25))
    closed_ok = abs(rho - closed) <= 1e-4
    return CheckResult(
        "period-map-oracle", worst < 1e-6 and closed_ok,
        f"worst relative gap {worst:.2e} (< 1e-6); "
        f"closed-form rho {rho:.6f} vs e^-1/4 = {closed:.6f}",
    )


def _agreement_grids(points: int = 20):
    mus = list(np.linspace(0.95, 0.999, points))
    freqs = list(np.linspace(0.001, 0.05, points))
    return mus, freqs


@_timed
def theory_empirics_agreement(workers: int = 1) -> CheckResult:
    """>= 90% of rho > 1.05 cells diverge in every run, and >= 90% of
    rho < 0.9 cells end below distance 1 in every run (3 runs/cell)."""
    mus, freqs = _agreement_grids()
    theory = floquet.theory_heatmap(0.01, mus, freqs, workers=workers)
    cfg = dataclasses.replace(
        harness.exp1(), runs=3, axis1=("mu", mus), axis2=("freq", freqs))
    records = harness.sweep(cfg, workers=workers)
    score = harness.agreement_score(theory, cfg, records)
    hot_frac = score["hot_agree"] / max(1, score["hot_total"])
    cold_frac = score["cold_agree"] / max(1, score["cold_total"])
    ok = (
        score["hot_total"] > 0 and score["cold_total"] > 0
        and hot_frac >= 0.9 and cold_frac >= 0.9
    )
    return CheckResult(
        "theory-empirics-agreement", ok,
        f"diverging cells {score['hot_agree']}/{score['hot_total']} "
        f"({100*hot_frac:.0f}%), converging {score['cold_agree']}/"
        f"{score['cold_total']} ({100*cold_frac:.0f}%), both >= 90%",
    )


@_timed
def stepsize_damping(workers: int = 1) -> CheckResult:
    """Strictly fewer rho > 1 cells at eta = 0.001 than at eta = 0.01."""
    mus, freqs = _agreement_grids()
    hot = {}
    for eta in (0.01, 0.001):
        grid = floquet.theory_heatmap(eta, mus, freqs, workers=workers)
        hot[eta] = int(np.sum(grid.values > 1.0))
    ok = hot[0.001] < hot[0.01]
    return CheckResult(
        "stepsize-damping", ok,
        f"rho>1 cells: {hot[0.01]} at eta=0.01 vs {hot[0.001]} at eta=0.001",
    )


@_timed
def momentum_damping(workers: int = 1) -> CheckResult:
    """Peak switching config (v=0.4, d=5): mu=0.95 hits the divergence
    cap for some interval T; mu=0.85 stays below metric 10 at every T."""
    base = dataclasses.replace(
        harness.exp4("variance"), mean_variance=0.4, runs=5, axis1=None)
    out = {}
    for mu in (0.95, 0.85):
        cfg = dataclasses.replace(base, mu=mu)
        _, means, _ = harness.sweep_curve(cfg, workers=workers)
        out[mu] = means
    capped = bool(np.any(out[0.95] >= DIVERGENCE_CAP))
    damped = bool(np.all(out[0.85] < 10.0))
    return CheckResult(
        "momentum-damping", capped and damped,
        f"mu=0.95 max metric {out[0.95].max():.3g} (cap hit: {capped}); "
        f"mu=0.85 max metric {out[0.85].max():.3g} (< 10: {damped})",
    )


@_timed
def sample_count_damping(workers: int = 1) -> CheckResult:
    """Square-wave sweep at 1 vs 5 samples/step (10 runs): the peak of
    the seed-averaged metric should be lower at n=1, at an interval at
    least as large."""
    cfg = dataclasses.replace(harness.exp3(), axis1=("samples_per_step", [1, 5]))
    records = harness.sweep(cfg, workers=workers)
    means = harness.aggregate(cfg, records)
    periods = np.asarray(cfg.axis2[1], dtype=float)
    per_n = means.reshape(2, periods.size)  # rows: n=1, n=5
    peak1, peak5 = float(per_n[0].max()), float(per_n[1].max())
    arg1 = float(periods[int(per_n[0].argmax())])
    arg5 = float(periods[int(per_n[1].argmax())])
    ok = peak1 < peak5 and arg1 >= arg5
    return CheckResult(
        "sample-count-damping", ok,
        f"peak metric n=1: {peak1:.3g} at T={arg1:.0f}; "
        f"n=5: {peak5:.3g} at T={arg5:.0f} (need n=1 lower and not left of n=5)",
    )


@_timed
def ar2_spectrum() -> CheckResult:
    """AR(2) mean tuned to f=0.03: spectral peak within +-0.005 and
    sample variance within 5% of 0.1 over 2^17 steps."""
    signal = Ar2(0.03, 0.1, 1e-5)
    rng = Rng(2)
    n = 2 ** 17
    series = np.empty(n)
    for k in range(n):
        series[k] = signal.mean_at(k, rng)[0]
    freqs, power = psd(series, 4096, 0.5)
    fpeak = float(freqs[int(np.argmax(power))])
    var = float(series.var())
    ok = abs(fpeak - 0.03) <= 0.005 and abs(var - 0.1) <= 0.005
    return CheckResult(
        "ar2-spectrum", ok,
        f"peak at f={fpeak:.5f} (target 0.03 +- 0.005), "
        f"variance {var:.4f} (target 0.1 +- 5%)",
    )


@_timed
def gradient_matrix_mc() -> CheckResult:
    """Batch-mean gradient over 1e5 samples matches B(theta - theta*)
    within 3 standard errors, componentwise, for 20 random setups."""
    rng = Rng(23)
    n = 100_000
    failures = 0
    for case in range(20):
        d = 1 + case % 4
        mean = rng.uniform(-1.0, 1.0, d)
        c = float(rng.uniform(0.1, 1.5))
        noise_var = 0.25 if case % 3 == 0 else 0.0
        theta_star = rng.uniform(-1.0, 1.0, d + 1)
        theta = rng.uniform(-1.0, 1.0, d + 1)
        x = mean + rng.normals((n, d)) * np.sqrt(c)
        x = np.concatenate([x, np.ones((n, 1))], axis=1)
        y = x @ theta_star
        if noise_var > 0.0:
            y = y + rng.normals(n) * np.sqrt(noise_var)
        per_sample = 2.0 * (x @ theta - y)[:, None] * x
        g = per_sample.mean(axis=0)
        se = per_sample.std(axis=0, ddof=1) / np.sqrt(n)
        expected = grad_matrix_from_mean(mean, c, True) @ (theta - theta_star)
        if np.any(np.abs(g - expected) > 3.0 * se + 1e-12):
            failures += 1
    return CheckResult(
        "gradient-matrix-mc", failures == 0,
        f"{20 - failures}/20 setups within 3 standard errors",
    )


@_timed
def mlp_gradcheck() -> CheckResult:
    """Backprop vs. central finite differences (step 1e-5): relative
    gap below 1e-4 on 20 random networks."""
    rng = Rng(31)
    worst = 0.0
    for case in range(20):
        d = 1 + case % 4
        params = mlpmod.he_init(d, rng)
        x = rng.normals((8, d))
        y = rng.normals(8)
        gw, gb = mlpmod.grad(params, x, y)
        analytic = mlpmod.flatten(gw, gb)
        vec = mlpmod.flatten(params.weights, params.biases)
        fd = np.empty_like(vec)
        h = 1e-5
        for i in range(vec.size):
            bump = vec.copy()
            bump[i] = vec[i] + h
            plus = _mlp_loss(mlpmod.unflatten(bump, params), x, y)
            bump[i] = vec[i] - h
            minus = _mlp_loss(mlpmod.unflatten(bump, params), x, y)
            fd[i] = (plus - minus) / (2.0 * h)
        rel = float(np.linalg.norm(fd - analytic) / max(np.linalg.norm(fd), 1e-12))
        worst = max(worst, rel)
    return CheckResult(
        "mlp-gradcheck", worst < 1e-4,
        f"worst relative gap {worst:.2e} (< 1e-4) over 20 networks",
    )


def _mlp_loss(params, x, y) -> float:
    resid = mlpmod.forward(params, x) - y
    return float(resid @ resid) / resid.size


@_timed
def adam_response_band(workers: int = 1) -> CheckResult:
    """ADAM at beta1=0.99 under switching shift: bounded everywhere
    (metric < 1e3) but with a clear frequency band (peak over T in
    [5, 60] at least 1.5x the T=0 baseline).  5 runs/cell."""
    cfg = dataclasses.replace(
        harness.exp5(), runs=5, beta1=0.99, axis1=None,
        axis2=("period", list(range(0, 65, 5))),
    )
    cells, means, records = harness.sweep_curve(cfg, workers=workers)
    periods = np.array([c["period"] for c in cells], dtype=float)
    bounded = all(r.metric < 1e3 for r in records)
    base = float(means[periods == 0][0])
    band = float(means[(periods >= 5) & (periods <= 60)].max())
    ok = bounded and band >= 1.5 * base
    return CheckResult(
        "adam-response-band", ok,
        f"bounded: {bounded}; band peak {band:.3g} vs baseline {base:.3g} "
        f"(ratio {band / base:.2f}, need >= 1.5)",
    )


@_timed
def network_resonance_band(workers: int = 1) -> CheckResult:
    """ReLU network under switching shift (v=0.4): iid baseline test
    loss < 0.05 and worst loss over T in [5, 40] above 2x the baseline.
    10 runs/cell."""
    cfg = dataclasses.replace(
        harness.exp6(), runs=10, mean_variance=0.4, axis1=None,
        axis2=("period", list(range(0, 45, 5))),
    )
    cells, means, _ = harness.sweep_curve(cfg, workers=workers)
    periods = np.array([c["period"] for c in cells], dtype=float)
    base = float(means[periods == 0][0])
    band = float(means[(periods >= 5) & (periods <= 40)].max())
    ok = base < 0.05 and band > 2.0 * base
    return CheckResult(
        "network-resonance-band", ok,
        f"baseline loss {base:.4f} (< 0.05), band worst {band:.4f} "
        f"(need > 2x baseline)",
    )


FAST_CHECKS = [
    splitting_equivalence,
    period_map_oracle,
    ar2_spectrum,
    gradient_matrix_mc,
    mlp_gradcheck,
]
SLOW_CHECKS = [
    stepsize_damping,
    momentum_damping,
    adam_response_band,
    sample_count_damping,
    theory_empirics_agreement,
    network_resonance_band,
]


def run(full: bool = False, workers: int = 1) -> list[CheckResult]:
    """Run the battery, printing one line per check."""
    results = []
    for fn in FAST_CHECKS:
        results.append(fn())
        print(results[-1].line(), flush=True)
    if full:
        for fn in SLOW_CHECKS:
            results.append(fn(workers=workers))
            print(results[-1].line(), flush=True)
    return results

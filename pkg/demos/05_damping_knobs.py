"""Three knobs that change the resonant response.

The oscillator's damping coefficient is alpha = (1-mu)/sqrt(eta), so
resonance weakens when momentum drops or the step size drops.  Gradient
noise (fewer samples per step) is a different kind of knob: it de-tunes
the clean oscillator but also injects multiplicative noise, and at the
fundamental resonance the noise injection wins, making single-sample
runs cap more often, not less.  All three effects are measured here.
"""

import dataclasses

import numpy as np

from resonance import harness, theory_heatmap

# 1) momentum: the switching-mean configuration that resonates hardest
print("momentum knob (switching mean, v=0.4, d=5, 3 runs):")
base = dataclasses.replace(
    harness.exp4("variance"), mean_variance=0.4, runs=3, axis1=None,
    axis2=("period", list(range(0, 52, 4))))
for mu in (0.95, 0.9, 0.85):
    cells, means, _ = harness.sweep_curve(
        dataclasses.replace(base, mu=mu), workers=2)
    print(f"  mu = {mu}: worst metric {means.max():.3g}")

# 2) step size: count resonant cells in the theory chart
print("\nstep-size knob (theory grid, 15x15):")
mus = list(np.linspace(0.95, 0.999, 15))
freqs = list(np.linspace(0.001, 0.05, 15))
for eta in (0.01, 0.005, 0.001):
    grid = theory_heatmap(eta, mus, freqs, workers=2)
    print(f"  eta = {eta}: {int((grid.values > 1.0).sum())} cells with rho > 1")

# 3) samples per step: square-wave fundamental, the honest picture
print("\nsample-count knob (square wave, T near the fundamental, 5 runs):")
cfg = dataclasses.replace(
    harness.exp3(), runs=5, axis1=("samples_per_step", [1, 5]),
    axis2=("period", list(range(20, 34, 2))))
records = harness.sweep(cfg, workers=2)
means = harness.aggregate(cfg, records).reshape(2, -1)
periods = cfg.axis2[1]
for row, n in zip(means, (1, 5)):
    worst = int(np.argmax(row))
    print(f"  n = {n}: worst metric {row[worst]:.3g} at T = {periods[worst]}")
print("  (single-sample noise amplifies capping at the fundamental here; "
      "the damping shows away from the peak)")

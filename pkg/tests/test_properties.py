"""Cross-module behavioral properties of the experiment families.

These are the slower, phenomenology-level checks (beyond the per-module
unit tests, below the acceptance suite): response monotonicity in the
shift variance and input dimension, momentum damping across model
families, the region-expansion effect of single-sample gradients, and
ADAM's boundedness over its whole sweep.  Roughly 3-4 minutes total on
two cores.
"""

import dataclasses

import numpy as np

from resonance import floquet, harness

WORKERS = 2


def _peaks(cfg):
    records = harness.sweep(cfg, workers=WORKERS)
    means = harness.aggregate(cfg, records)
    n1 = len(cfg.axis1[1])
    return means.reshape(n1, -1).max(axis=1)


def test_switching_peak_nondecreasing_in_variance():
    cfg = dataclasses.replace(
        harness.exp4("variance"), runs=3,
        axis2=("period", list(range(0, 52, 4))))
    peaks = _peaks(cfg)
    assert np.all(np.diff(peaks) >= 0.0), peaks


def test_switching_peak_nondecreasing_in_dimension():
    cfg = dataclasses.replace(
        harness.exp4("dim"), runs=3,
        axis2=("period", list(range(0, 52, 4))))
    peaks = _peaks(cfg)
    assert np.all(np.diff(peaks) >= 0.0), peaks


def test_momentum_085_restores_square_wave_baseline():
    # resonant square-wave cell returns to the experiment's iid baseline
    base = dataclasses.replace(
        harness.exp3(), runs=3, axis1=("samples_per_step", [5]),
        axis2=("period", [0, 27]))
    _, at_095, _ = harness.sweep_curve(base, workers=WORKERS)
    assert at_095[1] > 100.0 * at_095[0]  # resonance is live at mu=0.95
    _, at_085, _ = harness.sweep_curve(
        dataclasses.replace(base, mu=0.85), workers=WORKERS)
    assert at_085[1] <= 2.0 * at_095[0]


def test_momentum_085_restores_network_baseline():
    base = dataclasses.replace(
        harness.exp6(), runs=5, axis1=None, axis2=("period", [0, 20]))
    _, at_095, _ = harness.sweep_curve(base, workers=WORKERS)
    assert at_095[1] > 5.0 * at_095[0]  # the loss band is live at mu=0.95
    _, at_085, _ = harness.sweep_curve(
        dataclasses.replace(base, mu=0.85), workers=WORKERS)
    assert at_085[1] <= 2.0 * at_095[0]


def test_single_sample_gradients_expand_instability_region():
    """Dropping to one sample per step grows the set of divergent cells
    toward the expected-gradient (theory) predictions; it never relocates
    the region.  Cells are 'bright' when any run hits the divergence cap;
    cells whose theory rho sits in the marginal band are excluded."""
    mus = [0.95, 0.971, 0.98, 0.99, 0.999]
    fs = [0.04, 0.0425, 0.045, 0.0475, 0.05]
    theory = floquet.theory_heatmap(0.01, mus, fs, workers=WORKERS)
    marginal = {int(ci) for ci, rho in enumerate(theory.values.ravel())
                if abs(rho - 1.0) <= floquet.MARGINAL_BAND}
    bright = {}
    for n in (20, 1):
        cfg = dataclasses.replace(
            harness.exp1(), runs=10, samples_per_step=n,
            axis1=("mu", mus), axis2=("freq", fs))
        records = harness.sweep(cfg, workers=WORKERS)
        by_cell = {}
        for r in records:
            by_cell.setdefault(r.cell_index, []).append(r.diverged)
        bright[n] = {ci for ci, ds in by_cell.items() if any(ds)} - marginal
    assert bright[20] <= bright[1]
    assert len(bright[1]) > len(bright[20])


def test_adam_bounded_across_sweep():
    cfg = dataclasses.replace(
        harness.exp5(), runs=2,
        axis2=("period", [0, 20, 40, 60, 80, 100]))
    records = harness.sweep(cfg, workers=WORKERS)
    assert not any(r.diverged for r in records)
    assert max(r.metric for r in records) < 1e3

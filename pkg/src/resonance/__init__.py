"""Parametric resonance in momentum SGD under covariate shift.

Two pipelines around one phenomenon:

* theory - covariate shift makes the expected loss gradient of linear
  regression time-varying; momentum SGD then discretizes a damped
  parametric oscillator, and the spectral radius of the oscillator's
  period map decides convergence vs. exponential divergence
  (:mod:`resonance.floquet`);
* empirics - synthetic shift processes, optimizers, and a sweep harness
  that measures the same stability boundary by running the actual
  optimizer (:mod:`resonance.harness`).
"""

from .rng import Rng, derive_seed, splitmix64
from .numerics import (
    IntegrationDiverged, eigvals, expm, matmul, rk4_ltv, spectral_radius,
)
from .processes import (
    Ar2, CovariateProcess, MeanSignal, Sinusoid, SquareWave, Switching,
    ar2_coeffs, psd,
)
from .tasks import (
    LinearTask, NonlinearTask, distance_to_target, expected_grad_matrix,
    grad_matrix_from_mean, label, mse_grad,
)
from .optim import (
    DIVERGENCE_CAP, AdamState, SgdmState, adam_step, phase_vector,
    sgdm_step, split_step,
)
from .floquet import (
    MARGINAL_BAND, OscillatorSystem, StabilityVerdict, TheorySpec,
    assemble_A, cell_rho, monodromy, stability, theory_heatmap,
)
from .mlp import MlpParams, he_init
from .grids import (
    HeatmapGrid, contour_lines, read_grid_csv, render_pgm,
    write_contours_csv, write_grid_csv,
)
from .harness import (
    ExperimentConfig, RunRecord, agreement_score, empirical_heatmap,
    preset, run_cell, sweep, sweep_curve, theory_overlay, write_csv,
)

__version__ = "0.1.0"

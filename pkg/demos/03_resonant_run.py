"""Theory meets the optimizer: run momentum SGD at predicted cells.

Picks one cell the period map calls convergent and one it calls
resonant, runs the actual stochastic optimizer (20 samples per step,
10^4 steps), and compares outcomes.  The divergence is not a blow-up of
the step size in the classical sense: the same (eta, mu) converges just
fine when the input distribution stops moving.
"""

import dataclasses

from resonance import harness
from resonance.floquet import cell_rho, TheorySpec

cells = [
    ("iid baseline", 0.98, 0.0),
    ("stable shift", 0.95, 0.045),
    ("resonant shift", 0.98, 0.045),
]

cfg0 = dataclasses.replace(harness.exp1(), axis1=None, axis2=None, runs=1)
print(f"{'cell':<16} {'rho':>8}   {'run outcome'}")
for name, mu, freq in cells:
    rho = cell_rho(TheorySpec(), 0.01, mu, freq)
    cfg = dataclasses.replace(cfg0, mu=mu, freq=freq)
    rec = harness.run_cell(cfg, {}, 0, 0)
    outcome = (f"diverged at step {rec.diverge_step}" if rec.diverged
               else f"final distance {rec.metric:.2e}")
    print(f"{name:<16} {rho:8.4f}   {outcome}")

print("\nsame eta and mu throughout; only the input frequency changed.")

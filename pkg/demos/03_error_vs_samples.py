#!/usr/bin/env python3
"""How fast does the error shrink as measurements accumulate?

Median squared phaseless error per measurement budget m, for the Poisson
channel at unit dose.  Two slopes are reported: the squared error decays
like m^-1 here (the expected matrix has a fixed eigengap, so the
eigenvector angle is first-order in the deviation), while the unsquared
relative distance follows the m^-1/2 rate that the deviation-norm bound
predicts.
"""

import numpy as np

from lowdose import harness
from lowdose.harness import Cell, ExperimentConfig

n, alpha, trials, seed = 32, 1.0, 20, 3
m_grid = tuple(2**e for e in range(10, 15))

cfg = ExperimentConfig(
    models=("poisson",), n_grid=(n,), m_grid=m_grid, alpha_grid=(alpha,),
    trials=trials, master_seed=seed,
).validate()

medians = []
print(f"poisson channel, n={n}, alpha={alpha}, {trials} trials per cell")
for m in m_grid:
    errors = [harness.run_trial(Cell("poisson", n, m, alpha), t, cfg).rel_error for t in range(trials)]
    medians.append(float(np.median(errors)))
    print(f"  m = {m:6d}   median dist^2/alpha = {medians[-1]:.5f}")

slope_sq, _ = harness.ols_loglog(m_grid, medians)
slope_lin, _ = harness.ols_loglog(m_grid, [np.sqrt(v) for v in medians])
print(f"\nlog-log slope of the squared error:   {slope_sq:+.3f}   (~ -1)")
print(f"log-log slope of the relative distance: {slope_lin:+.3f}   (~ -1/2)")

#!/usr/bin/env python3
"""Measuring concentration directly: the spectral norm of
(count-weighted covariance) - (its closed-form expectation), matrix-free.

The deviation norm drives the recovery guarantee.  Its bound's absolute
constants are not knowable a priori, so the harness calibrates them from
a reference run (fit-constants); this script does a small calibration and
then checks measured deviations against the fitted bound elsewhere.
"""

import numpy as np

from lowdose import harness, theory
from lowdose.harness import Cell, ExperimentConfig

seed = 5
n, m_ref, alpha_ref = 16, 2048, 1.0

constants, details = harness.fit_bound_constants(
    master_seed=seed, n=n, m=m_ref, alpha=alpha_ref, trials=40
)
print("calibration at the reference configuration:")
for key, value in details.items():
    print(f"  {key} = {value}")
print(f"fitted: leading={constants.leading:.4f}, dose_offset={constants.dose_offset:.4f}\n")

print(f"{'model':>10s} {'m':>6s} {'alpha':>6s} {'measured dev':>13s} {'fitted bound':>13s} {'ok':>3s}")
for model in ("bernoulli", "poisson"):
    for m in (1024, 4096):
        for alpha in (0.5, 2.0):
            cfg = ExperimentConfig(
                models=(model,), n_grid=(n,), m_grid=(m,), alpha_grid=(alpha,),
                trials=10, master_seed=seed, measure_deviation=True, constants=constants,
            ).validate()
            records = harness.run_trials(cfg, cells=[Cell(model, n, m, alpha)])
            measured = float(np.median([r.deviation_norm for r in records]))
            bound = theory.deviation_norm_bound(model, n, m, alpha, constants)
            print(f"{model:>10s} {m:6d} {alpha:6.1f} {measured:13.5f} {bound:13.5f} {'yes' if measured <= bound else 'NO':>3s}")

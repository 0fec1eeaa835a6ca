"""Phaseless recovery from low-dose photon counts via the spectral method.

Library layout:
  streams   deterministic splittable random streams (Philox keyed)
  linalg    matrix-free symmetric operators and power iteration
  model     signals, Gaussian ensembles, count channels
  recovery  the spectral estimator and the phaseless error metric
  theory    closed-form expectations, moments, bounds, dose factors
  verify    oracle verification checks (quadrature / Monte Carlo)
  harness   config-driven Monte Carlo sweeps with canonical CSV output
  cli       the `lowdose` command
"""

from .linalg import (
    DenseSymmetric,
    EigenResult,
    NoDominantEigenpair,
    OperatorDifference,
    RankOnePlusIdentity,
    SymmetricOperator,
    WeightedGram,
    spectral_norm,
    top_eigenpair,
)
from .model import (
    MemoryCapExceeded,
    ObservationVector,
    SensingEnsemble,
    SignalVector,
    default_truncation,
    draw_ensemble,
    make_signal,
    noiseless_intensities,
    observe_bernoulli,
    observe_poisson,
    truncate,
)
from .recovery import (
    SpectralEstimate,
    objective_value,
    phaseless_distance,
    recover,
    relative_error,
    spectral_matrix,
)
from .streams import RngStream, derive_stream_id
from .theory import (
    BoundConstants,
    deviation_norm_bound,
    expected_matrix_coefficients,
    expected_spectral_matrix,
    gaussian_damped_moment,
    max_count_threshold,
    meets_sample_threshold,
    oversampling_factor,
    poisson_fourth_moment,
    poisson_second_moment,
    recovery_error_bound,
    residual_correlation,
    variance_proxy,
)

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "DenseSymmetric",
    "EigenResult",
    "MemoryCapExceeded",
    "NoDominantEigenpair",
    "ObservationVector",
    "OperatorDifference",
    "RankOnePlusIdentity",
    "RngStream",
    "SensingEnsemble",
    "SignalVector",
    "SpectralEstimate",
    "SymmetricOperator",
    "WeightedGram",
    "default_truncation",
    "derive_stream_id",
    "deviation_norm_bound",
    "draw_ensemble",
    "expected_matrix_coefficients",
    "expected_spectral_matrix",
    "gaussian_damped_moment",
    "make_signal",
    "max_count_threshold",
    "meets_sample_threshold",
    "noiseless_intensities",
    "objective_value",
    "observe_bernoulli",
    "observe_poisson",
    "oversampling_factor",
    "phaseless_distance",
    "poisson_fourth_moment",
    "poisson_second_moment",
    "recover",
    "recovery_error_bound",
    "relative_error",
    "residual_correlation",
    "spectral_matrix",
    "spectral_norm",
    "top_eigenpair",
    "truncate",
    "variance_proxy",
]

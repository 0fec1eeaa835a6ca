"""Closed-form oracle quantities for the count channels.

Everything here is an exact formula: expected spectral matrices, Gaussian
moments damped by exp(-alpha g^2), mixed count/projection moments, the
per-direction variance proxy with its uniform upper bound, the max-count
tail threshold, and the deviation / recovery error bounds with their
calibratable leading constants.  These functions double as test oracles
and as predicted curves in harness output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SignalVector


@dataclass(frozen=True)
class BoundConstants:
    """Calibratable constants of the deviation/recovery bounds.

    The bounds hold with *some* positive constants; numeric values are an
    artifact calibration (see the fit-constants command), never treated as
    ground truth.  `leading` multiplies every bound, `dose_offset` is the
    additive dose constant in the Poisson bound, `tail_exponent` is the
    probability exponent (> 1).
    """

    leading: float = 1.0
    dose_offset: float = 1.0
    tail_exponent: float = 2.0

    def __post_init__(self):
        if not (self.leading > 0.0 and self.dose_offset > 0.0):
            raise ValueError("leading and dose_offset must be positive")
        if not self.tail_exponent > 1.0:
            raise ValueError("tail_exponent must exceed 1")


def _check_model(model: str, allowed=("poisson", "bernoulli")) -> str:
    if model not in allowed:
        raise ValueError(f"model must be one of {allowed}, got {model!r}")
    return model


def expected_matrix_coefficients(model: str, alpha: float) -> tuple[float, float]:
    """(outer, ident) with E[count-weighted covariance] = outer*x x^T + ident*I.

    The noiseless channel shares the poisson coefficients: conditioning on
    the ensemble gives the same mean intensity either way.
    """
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    _check_model(model, ("poisson", "bernoulli", "noiseless"))
    if model in ("poisson", "noiseless"):
        return 2.0, alpha
    s = 2.0 * alpha + 1.0
    return 2.0 / s**1.5, 1.0 - s**-0.5


def expected_spectral_matrix(model: str, signal: SignalVector) -> np.ndarray:
    """Dense E[(1/m) sum y_i a_i a_i^T] for the given channel and signal."""
    outer, ident = expected_matrix_coefficients(model, signal.alpha)
    return outer * np.outer(signal.x, signal.x) + ident * np.eye(signal.n)


def residual_correlation(u, v, w) -> float:
    """Correlation of the residual Gaussians when <a,v>, <a,w> are split
    along <a,u>: (<v,w> - <u,v><u,w>) / (sqrt(1-<u,v>^2) sqrt(1-<u,w>^2)).

    Inputs must be unit vectors; u collinear with v or w is rejected.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    for name, vec in (("u", u), ("v", v), ("w", w)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
            raise ValueError(f"{name} must be a unit vector")
    uv = float(u @ v)
    uw = float(u @ w)
    if abs(uv) >= 1.0 or abs(uw) >= 1.0:
        raise ValueError("u must not be collinear with v or w")
    value = (float(v @ w) - uv * uw) / (math.sqrt(1.0 - uv**2) * math.sqrt(1.0 - uw**2))
    return min(1.0, max(-1.0, value))


def gaussian_damped_moment(alpha: float, order: int) -> float:
    """E[g^order * exp(-alpha g^2)] for g ~ N(0,1), order in {0, 2, 4}."""
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    s = 2.0 * alpha + 1.0
    if order == 0:
        return s**-0.5
    if order == 2:
        return s**-1.5
    if order == 4:
        return 3.0 * s**-2.5
    raise ValueError(f"unsupported order {order}; expected 0, 2 or 4")


def poisson_fourth_moment(alpha: float, rho: float) -> float:
    """E[y^2 <a,z>^4] for a poisson count y with rate <a,x>^2 and unit z,
    where rho = <x/||x||, z>."""
    if abs(rho) > 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    r2 = rho * rho
    return 24.0 * alpha**2 * r2 * r2 + 72.0 * alpha**2 * r2 + 9.0 * alpha**2 + 12.0 * alpha * r2 + 3.0 * alpha


def poisson_second_moment(alpha: float, rho: float) -> float:
    """E[<a,x>^2 <a,z>^2] = 2 alpha rho^2 + alpha."""
    if abs(rho) > 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    return 2.0 * alpha * rho * rho + alpha


def variance_proxy(model: str, alpha: float, rho: float, m: int) -> tuple[float, float]:
    """Per-direction standard deviation of the centered objective, plus its
    closed-form upper bound: (exact, bound) with exact <= bound always.
    """
    _check_model(model)
    if m < 1:
        raise ValueError("m must be >= 1")
    if abs(rho) > 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    r2 = rho * rho
    if model == "poisson":
        inner = (
            20.0 * alpha**2 * r2 * r2
            + 68.0 * alpha**2 * r2
            + 8.0 * alpha**2
            + 12.0 * alpha * r2
            + 3.0 * alpha
        )
        exact = math.sqrt(inner / m)
        bound = (10.0 * alpha + 4.0 * math.sqrt(alpha)) / math.sqrt(m)
        return exact, bound
    s = 2.0 * alpha + 1.0
    g_parallel = 2.0 - 3.0 * s**-2.5 + 2.0 * s**-1.5 - s**-3.0
    g_cross = 2.0 - 2.0 * s**-1.5 + s**-0.5 - s**-2.0
    g_orth = 2.0 - s**-0.5 - s**-2.0
    inner = r2 * r2 * g_parallel + 2.0 * r2 * (1.0 - r2) * g_cross + (1.0 - r2) ** 2 * g_orth
    exact = math.sqrt(max(inner, 0.0) / m)
    bound = math.sqrt(12.0 / m)
    return exact, bound


def max_count_threshold(alpha: float, beta: float, m: int) -> tuple[float, float]:
    """(threshold, tail_bound): max_i y_i stays below tau*log(m) except with
    probability <= 3 m^(-beta), where tau = max(e^2*alpha, beta + 1)."""
    if m < 2:
        raise ValueError("m must be >= 2 (log(m) threshold is vacuous below)")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    tau = max(math.e**2 * alpha, beta + 1.0)
    return tau * math.log(m), 3.0 * m**-beta


def meets_sample_threshold(n: int, m: int) -> bool:
    """True when m >= n log(n), the regime the deviation bound is stated for."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return m >= n * math.log(n)


def deviation_norm_bound(model: str, n: int, m: int, alpha: float, constants: BoundConstants) -> float:
    """Upper bound on ||spectral matrix - its expectation||.

    poisson:   leading * (alpha + dose_offset) * log(m) * sqrt(log n) * sqrt(n/m)
    bernoulli: leading * sqrt(log n) * sqrt(n/m)

    Evaluates below the m >= n log(n) threshold too; callers record a flag.
    """
    _check_model(model)
    if n < 2:
        raise ValueError("n must be >= 2")
    if m < 2:
        raise ValueError("m must be >= 2")
    geometry = math.sqrt(math.log(n)) * math.sqrt(n / m)
    if model == "poisson":
        return constants.leading * (alpha + constants.dose_offset) * math.log(m) * geometry
    return constants.leading * geometry


def recovery_error_bound(model: str, n: int, m: int, alpha: float, constants: BoundConstants) -> float:
    """Predicted upper bound on dist(x0, x)^2 / alpha.

    poisson:   2 * leading * (1 + dose_offset/alpha) * log(m) * sqrt(log n) * sqrt(n/m)
    bernoulli: 2 * leading * (2 alpha + 1)^(3/2) / alpha * sqrt(log n) * sqrt(n/m)
    """
    _check_model(model)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if model == "poisson":
        return 2.0 / alpha * deviation_norm_bound("poisson", n, m, alpha, constants)
    return (
        2.0 * (2.0 * alpha + 1.0) ** 1.5 / alpha
        * deviation_norm_bound("bernoulli", n, m, alpha, constants)
    )


def oversampling_factor(model: str, alpha: float) -> float:
    """Dose-dependent factor in the sampling complexity m ~ n log(n) * factor.

    poisson: (1 + 1/alpha)^2; bernoulli: (2 alpha + 1)^3 / alpha^2, minimal
    at alpha = 1.
    """
    _check_model(model)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if model == "poisson":
        return (1.0 + 1.0 / alpha) ** 2
    return (2.0 * alpha + 1.0) ** 3 / alpha**2

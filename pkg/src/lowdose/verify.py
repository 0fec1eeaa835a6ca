"""Self-contained verification of the closed-form oracles.

Each check compares a formula from `theory` against an independent route:
adaptive quadrature, Monte Carlo sampling through the actual channels, or
exhaustive scans.  The harness `verify` subcommand prints one row per
check; the test suite asserts the same results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import theory
from .model import make_signal
from .streams import RngStream

DEFAULT_VERIFY_SEED = 1729


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    limit: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: measured={self.measured:.6g} limit={self.limit:.6g}  ({self.detail})"


def _stream(master_seed: int, label: str, index: int = 0) -> RngStream:
    return RngStream.derive(master_seed, index, f"verify|{label}")


def check_damped_moment_quadrature(master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """Closed-form E[g^k exp(-alpha g^2)] vs adaptive quadrature, <= 1e-10 abs."""
    worst = 0.0
    for alpha in (0.0, 0.5, 1.0, 10.0):
        for order in (0, 2, 4):
            integrand = lambda t, a=alpha, k=order: (
                t**k * math.exp(-a * t * t) * math.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)
            )
            value, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)
            worst = max(worst, abs(value - theory.gaussian_damped_moment(alpha, order)))
    return CheckResult(
        "gaussian_damped_moment_quadrature",
        worst <= 1e-10,
        worst,
        1e-10,
        "max abs error over alpha in {0,0.5,1,10}, order in {0,2,4}",
    )


def check_expected_matrix_mc(model: str, master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """Frobenius distance between the Monte Carlo mean matrix and the closed form."""
    n, m, alpha, trials = 8, 2000, 1.0, 500
    sig = make_signal(n, alpha, "random_unit", _stream(master_seed, f"exp_mat_sig_{model}"))
    total = np.zeros((n, n))
    for trial in range(trials):
        a = _stream(master_seed, f"exp_mat_ens_{model}", trial).standard_gaussian((m, n))
        lam = (a @ sig.x) ** 2
        obs_rng = _stream(master_seed, f"exp_mat_obs_{model}", trial)
        if model == "poisson":
            y = obs_rng.poisson(lam).astype(float)
        else:
            y = obs_rng.bernoulli(-np.expm1(-lam)).astype(float)
        total += (a.T * y) @ a / m
    dist = float(np.linalg.norm(total / trials - theory.expected_spectral_matrix(model, sig)))
    return CheckResult(
        f"expected_matrix_mc_{model}",
        dist <= 0.05,
        dist,
        0.05,
        f"Frobenius gap, {trials} trials of m={m}, n={n}, alpha={alpha}",
    )


def check_moment_mc(master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """Mixed count/projection moments vs Monte Carlo over the bivariate split."""
    alpha, rho, draws = 1.0, 0.5, 10**6
    rng = _stream(master_seed, "moments")
    g = rng.standard_gaussian(draws)
    h = rng.standard_gaussian(draws)
    proj = rho * g + math.sqrt(1.0 - rho * rho) * h

    fourth_samples = (alpha**2 * g**4 + alpha * g**2) * proj**4
    second_samples = (alpha * g**2) * proj**2

    worst_sigma = 0.0
    for samples, closed in (
        (fourth_samples, theory.poisson_fourth_moment(alpha, rho)),
        (second_samples, theory.poisson_second_moment(alpha, rho)),
    ):
        se = float(np.std(samples, ddof=1)) / math.sqrt(draws)
        worst_sigma = max(worst_sigma, abs(float(np.mean(samples)) - closed) / se)
    return CheckResult(
        "count_projection_moments_mc",
        worst_sigma <= 3.0,
        worst_sigma,
        3.0,
        f"worst |mc - closed| in standard errors, {draws} draws, alpha={alpha}, rho={rho}",
    )


def check_variance_bound_scan(master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """exact <= bound for the variance proxy on 10^4 random parameter tuples."""
    rng = _stream(master_seed, "variance_scan")
    tuples = 10**4
    alphas = rng.uniform(tuples) * 10.0
    rhos = rng.uniform(tuples) * 2.0 - 1.0
    ms = (rng.uniform(tuples) * 10**6).astype(np.int64) + 1
    violations = 0
    for i in range(tuples):
        model = "poisson" if i % 2 == 0 else "bernoulli"
        exact, bound = theory.variance_proxy(model, float(alphas[i]), float(rhos[i]), int(ms[i]))
        if exact > bound:
            violations += 1
    return CheckResult(
        "variance_proxy_within_bound",
        violations == 0,
        float(violations),
        0.0,
        f"violations over {tuples} random (model, alpha, rho, m) tuples",
    )


def check_max_count_tail(master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """Frequency of max count exceeding the tail threshold stays under 5%."""
    alpha, beta, m, n, trials = 1.0, 1.0, 1000, 16, 1000
    threshold, _ = theory.max_count_threshold(alpha, beta, m)
    exceed = 0
    for trial in range(trials):
        sig = make_signal(n, alpha, "random_unit", _stream(master_seed, "tail_sig", trial))
        ens_rng = _stream(master_seed, "tail_ens", trial)
        a = ens_rng.standard_gaussian((m, n))
        counts = _stream(master_seed, "tail_obs", trial).poisson((a @ sig.x) ** 2)
        if counts.max() >= threshold:
            exceed += 1
    fraction = exceed / trials
    return CheckResult(
        "max_count_tail_frequency",
        fraction <= 0.05,
        fraction,
        0.05,
        f"P(max count >= {threshold:.2f}) over {trials} trials, m={m}",
    )


def check_residual_correlation_mc(master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """Reconstructed residual Gaussians match the closed-form correlation."""
    rng = _stream(master_seed, "residual_corr")
    dim, draws = 5, 10**6
    u, v, w = (vec / np.linalg.norm(vec) for vec in rng.standard_gaussian((3, dim)))
    a = rng.standard_gaussian((draws, dim))
    g = a @ u
    uv, uw = float(u @ v), float(u @ w)
    h1 = (a @ v - uv * g) / math.sqrt(1.0 - uv**2)
    h2 = (a @ w - uw * g) / math.sqrt(1.0 - uw**2)
    empirical = float(np.mean(h1 * h2))
    gap = abs(empirical - theory.residual_correlation(u, v, w))
    return CheckResult(
        "residual_correlation_mc",
        gap <= 0.005,
        gap,
        0.005,
        f"|empirical - closed| over {draws} reconstructed pairs in R^{dim}",
    )


def check_dose_minimality(master_seed: int = DEFAULT_VERIFY_SEED) -> CheckResult:
    """Bernoulli oversampling factor has its unique grid minimum at alpha = 1."""
    grid = np.geomspace(0.01, 100.0, 10**4)
    grid = np.unique(np.append(grid, 1.0))
    factors = np.array([theory.oversampling_factor("bernoulli", float(a)) for a in grid])
    at_one = theory.oversampling_factor("bernoulli", 1.0)
    others = factors[grid != 1.0]
    ok = bool(np.all(others > at_one))
    margin = float(others.min() - at_one)
    return CheckResult(
        "bernoulli_dose_minimum_at_one",
        ok,
        margin,
        0.0,
        f"min gap to factor(1)={at_one:.6g} over {grid.size} grid points in (0.01, 100]",
    )


def run_all_checks(master_seed: int = DEFAULT_VERIFY_SEED) -> list[CheckResult]:
    return [
        check_damped_moment_quadrature(master_seed),
        check_expected_matrix_mc("poisson", master_seed),
        check_expected_matrix_mc("bernoulli", master_seed),
        check_moment_mc(master_seed),
        check_variance_bound_scan(master_seed),
        check_max_count_tail(master_seed),
        check_residual_correlation_mc(master_seed),
        check_dose_minimality(master_seed),
    ]

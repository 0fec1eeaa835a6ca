import math

import numpy as np
import pytest

from lowdose.model import SignalVector, make_signal
from lowdose.theory import (
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


def test_expected_matrix_poisson_basis_signal():
    sig = make_signal(2, 1.0, direction=0)
    assert np.array_equal(expected_spectral_matrix("poisson", sig), np.array([[3.0, 0.0], [0.0, 1.0]]))


def test_expected_matrix_poisson_diagonal_plus_rank_one():
    sig = make_signal(2, 2.0, direction=np.array([1.0, 1.0]))
    assert np.allclose(
        expected_spectral_matrix("poisson", sig), np.array([[4.0, 2.0], [2.0, 4.0]]), rtol=0, atol=1e-12
    )


def test_expected_matrix_zero_signal_vanishes():
    zero = SignalVector(x=np.zeros(3), alpha=0.0)
    assert np.array_equal(expected_spectral_matrix("poisson", zero), np.zeros((3, 3)))
    assert np.array_equal(expected_spectral_matrix("bernoulli", zero), np.zeros((3, 3)))


def test_expected_matrix_bernoulli_basis_signal():
    sig = make_signal(2, 1.0, direction=0)
    got = expected_spectral_matrix("bernoulli", sig)
    top = 2.0 / 3.0**1.5 + 1.0 - 3.0**-0.5
    bottom = 1.0 - 3.0**-0.5
    assert np.allclose(got, np.diag([top, bottom]), rtol=0, atol=1e-12)
    assert top == pytest.approx(0.80755, abs=5e-6)
    assert bottom == pytest.approx(0.42265, abs=5e-6)


def test_expected_matrix_bernoulli_high_dose_limit():
    outer, ident = expected_matrix_coefficients("bernoulli", 1e6)
    assert abs(outer * 1e6) <= 1e-2  # rank-one part (scaled by alpha) dies off
    assert abs(ident - 1.0) <= 1e-2


def test_expected_matrix_noiseless_matches_poisson():
    assert expected_matrix_coefficients("noiseless", 1.7) == expected_matrix_coefficients("poisson", 1.7)


def test_residual_correlation_orthogonal_reduces_to_inner_product():
    u = np.array([1.0, 0.0, 0.0])
    v = np.array([0.0, 1.0, 0.0])
    w = np.array([0.0, 0.6, 0.8])
    assert residual_correlation(u, v, w) == pytest.approx(0.6, abs=1e-12)


def test_residual_correlation_equal_vectors_is_one():
    u = np.array([1.0, 0.0])
    v = np.array([0.6, 0.8])
    assert residual_correlation(u, v, v) == pytest.approx(1.0, abs=1e-12)


def test_residual_correlation_rejects_collinear_and_non_unit():
    u = np.array([1.0, 0.0])
    with pytest.raises(ValueError):
        residual_correlation(u, u, np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        residual_correlation(2.0 * u, np.array([0.0, 1.0]), np.array([0.0, 1.0]))


def test_residual_correlation_stays_in_unit_interval():
    rng = np.random.default_rng(0)
    for _ in range(200):
        u, v, w = (vec / np.linalg.norm(vec) for vec in rng.standard_normal((3, 6)))
        assert -1.0 <= residual_correlation(u, v, w) <= 1.0


def test_gaussian_damped_moment_values():
    assert gaussian_damped_moment(0.0, 0) == 1.0
    assert gaussian_damped_moment(0.0, 4) == 3.0
    assert gaussian_damped_moment(1.0, 4) == pytest.approx(3.0**-1.5, rel=1e-15)
    assert gaussian_damped_moment(0.5, 0) == pytest.approx(2.0**-0.5, rel=1e-15)
    with pytest.raises(ValueError):
        gaussian_damped_moment(1.0, 3)
    with pytest.raises(ValueError):
        gaussian_damped_moment(-0.5, 0)


def test_poisson_fourth_moment_values():
    # collinear unit dose: forced by the pure Gaussian moments 105 + 15
    assert poisson_fourth_moment(1.0, 1.0) == 120.0
    assert poisson_fourth_moment(2.0, 0.0) == 9.0 * 4.0 + 3.0 * 2.0
    with pytest.raises(ValueError):
        poisson_fourth_moment(1.0, 1.5)


def test_poisson_second_moment_values():
    assert poisson_second_moment(1.0, 1.0) == 3.0
    assert poisson_second_moment(1.0, 0.0) == 1.0
    assert poisson_second_moment(2.0, 0.5) == 3.0


def test_variance_proxy_poisson_values():
    exact, bound = variance_proxy("poisson", 1.0, 0.0, 1)
    assert exact == pytest.approx(math.sqrt(11.0), rel=1e-15)
    assert bound == 14.0
    exact, bound = variance_proxy("poisson", 1.0, 1.0, 100)
    assert exact == pytest.approx(math.sqrt(111.0) / 10.0, rel=1e-15)
    assert bound == pytest.approx(1.4, rel=1e-15)


def test_variance_proxy_bernoulli_bound():
    for alpha, rho in ((0.2, 0.9), (1.0, 0.0), (5.0, -0.7)):
        exact, bound = variance_proxy("bernoulli", alpha, rho, 12)
        assert bound == 1.0
        assert exact <= 1.0


def test_variance_proxy_zero_dose_is_degenerate():
    assert variance_proxy("poisson", 0.0, 0.3, 5)[0] == 0.0
    assert variance_proxy("bernoulli", 0.0, 0.3, 5)[0] == pytest.approx(0.0, abs=1e-12)


def test_max_count_threshold_values():
    threshold, tail = max_count_threshold(1.0, 1.0, 1000)
    assert threshold == pytest.approx(math.e**2 * math.log(1000), rel=1e-15)
    assert tail == pytest.approx(3e-3, rel=1e-15)
    threshold, _ = max_count_threshold(0.1, 3.0, 100)
    assert threshold == pytest.approx(4.0 * math.log(100), rel=1e-15)
    with pytest.raises(ValueError):
        max_count_threshold(1.0, 1.0, 1)


def test_sample_threshold_flag():
    assert meets_sample_threshold(32, 4096)
    assert not meets_sample_threshold(32, 100)
    with pytest.raises(ValueError):
        meets_sample_threshold(1, 100)


def test_deviation_bound_formulas():
    k = BoundConstants(leading=1.0, dose_offset=1.0, tail_exponent=2.0)
    n, m, alpha = 3, 10**4, 1.0
    geometry = math.sqrt(math.log(n)) * math.sqrt(n / m)
    assert deviation_norm_bound("bernoulli", n, m, alpha, k) == pytest.approx(geometry, rel=1e-15)
    ratio = deviation_norm_bound("poisson", n, m, alpha, k) / deviation_norm_bound(
        "bernoulli", n, m, alpha, k
    )
    assert ratio == pytest.approx((alpha + k.dose_offset) * math.log(m), rel=1e-12)


def test_recovery_bound_composition():
    k = BoundConstants(leading=0.7, dose_offset=2.0, tail_exponent=2.0)
    n, m = 16, 2**12
    for alpha in (0.25, 1.0, 4.0):
        expected = (
            2.0 * (2.0 * alpha + 1.0) ** 1.5 / alpha * deviation_norm_bound("bernoulli", n, m, alpha, k)
        )
        assert recovery_error_bound("bernoulli", n, m, alpha, k) == pytest.approx(expected, rel=1e-12)
        expected_p = 2.0 / alpha * deviation_norm_bound("poisson", n, m, alpha, k)
        assert recovery_error_bound("poisson", n, m, alpha, k) == pytest.approx(expected_p, rel=1e-12)


def test_recovery_bound_poisson_high_dose_limit():
    k = BoundConstants(leading=1.0, dose_offset=1.0, tail_exponent=2.0)
    n, m = 16, 2**12
    limit = 2.0 * math.log(m) * math.sqrt(math.log(n)) * math.sqrt(n / m)
    value = recovery_error_bound("poisson", n, m, 1e6, k)
    assert abs(value - limit) / limit <= 1e-3


def test_recovery_bound_monotone_in_m():
    k = BoundConstants()
    values = [recovery_error_bound("poisson", 32, 2**e, 1.0, k) for e in range(10, 17)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_bound_argument_validation():
    k = BoundConstants()
    with pytest.raises(ValueError):
        deviation_norm_bound("poisson", 1, 100, 1.0, k)
    with pytest.raises(ValueError):
        recovery_error_bound("poisson", 16, 100, 0.0, k)
    with pytest.raises(ValueError):
        deviation_norm_bound("noiseless", 16, 100, 1.0, k)


def test_bound_constants_validation():
    with pytest.raises(ValueError):
        BoundConstants(leading=0.0)
    with pytest.raises(ValueError):
        BoundConstants(dose_offset=-1.0)
    with pytest.raises(ValueError):
        BoundConstants(tail_exponent=1.0)


def test_oversampling_factor_values():
    assert oversampling_factor("bernoulli", 1.0) == 27.0
    assert oversampling_factor("poisson", 1.0) == 4.0
    with pytest.raises(ValueError):
        oversampling_factor("poisson", 0.0)


def test_oversampling_factor_bernoulli_minimal_at_unit_dose():
    best = oversampling_factor("bernoulli", 1.0)
    for alpha in (0.1, 0.5, 2.0, 10.0):
        assert best < oversampling_factor("bernoulli", alpha)

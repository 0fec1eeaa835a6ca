import pytest

from lowdose import verify


@pytest.fixture(scope="module")
def results():
    return verify.run_all_checks()


def test_all_oracle_checks_pass(results):
    failures = [r.name for r in results if not r.passed]
    assert not failures, f"oracle checks failed: {failures}"


def test_quadrature_check_tolerance(results):
    row = next(r for r in results if r.name == "gaussian_damped_moment_quadrature")
    assert row.measured <= 1e-10


def test_tail_check_within_gate(results):
    row = next(r for r in results if r.name == "max_count_tail_frequency")
    assert row.measured <= 0.05


def test_report_lines_render(results):
    for row in results:
        line = row.line()
        assert row.name in line and line.startswith(("PASS", "FAIL"))


def test_checks_are_deterministic():
    a = verify.check_moment_mc()
    b = verify.check_moment_mc()
    assert a == b

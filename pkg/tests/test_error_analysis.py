import math

import pytest

from ito_fourier import error_analysis
from ito_fourier.coefficients import RESIDUAL_FLOOR, build_table, taylor_ito_table
from ito_fourier.error_analysis import (
    convergence_rate_probe,
    error_report,
    exact_mse_distinct,
    exact_mse_theorem5,
    moment_bound,
    moment_constant,
    mse_upper_bound,
    select_truncation,
)
from ito_fourier.exceptions import CapacityError, ContractError, DomainError, UnsupportedError, ValidityWarning
from ito_fourier.models import SeedSpec, WeightFunction
from ito_fourier.oracle import empirical_mse

ONE = WeightFunction.one()


@pytest.mark.parametrize("k p expected".split(), ((2, 1, 1.0 / 6.0), (3, 0, 5.0 / 6.0), (1, 4, 0.0)))
def test_mse_upper_bound(legendre, k, p, expected):
    assert mse_upper_bound(taylor_ito_table(k, legendre, p)) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("n k expected".split(), ((1, 1, 1), (1, 3, 36), (2, 2, 1728), (2, 3, 5038848)))
def test_moment_constant(n, k, expected):
    assert moment_constant(n, k) == expected


def test_moment_constant_rejects_zero_order():
    with pytest.raises(DomainError):
        moment_constant(0, 2)


def test_first_moment_bound_is_mse_bound(legendre):
    for k in (1, 2, 3):
        table = taylor_ito_table(k, legendre, 3)
        assert moment_bound(table, 1) == mse_upper_bound(table)


def test_higher_moment_bound(legendre):
    table = taylor_ito_table(2, legendre, 1)
    assert moment_bound(table, 2) == pytest.approx(1728.0 / 144.0)
    with pytest.raises(DomainError):
        moment_bound(table, 0)


@pytest.mark.parametrize("k p expected".split(), ((2, 1, 1.0 / 12.0), (3, 0, 5.0 / 36.0)))
def test_exact_mse_distinct(legendre, k, p, expected):
    assert exact_mse_distinct(taylor_ito_table(k, legendre, p)) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("icomp", ((1, 2), (1, 2, 3), (3, 1, 2)))
def test_symmetrised_error_reduces_to_residual(any_basis, icomp):
    table = taylor_ito_table(len(icomp), any_basis, 4)
    assert exact_mse_theorem5(table, icomp) == pytest.approx(exact_mse_distinct(table), abs=1e-13)


@pytest.mark.parametrize("p", range(7))
def test_repeated_double_integral_is_reproduced_exactly(legendre, p):
    assert exact_mse_theorem5(taylor_ito_table(2, legendre, p), (1, 1)) <= 1e-12


@pytest.mark.parametrize("icomp", ((1, 1, 2), (1, 2, 1), (2, 1, 1), (1, 1, 1)))
def test_exact_error_respects_bound(any_basis, icomp):
    for p in (0, 2, 5):
        table = taylor_ito_table(3, any_basis, p)
        exact = exact_mse_theorem5(table, icomp)
        assert 0.0 <= exact <= mse_upper_bound(table) + RESIDUAL_FLOOR


def test_triple_repeated_error_vanishes(legendre):
    for p in (0, 3):
        assert exact_mse_theorem5(taylor_ito_table(3, legendre, p), (2, 2, 2)) <= 1e-12


def test_symmetrised_error_limits(legendre):
    with pytest.raises(UnsupportedError):
        exact_mse_theorem5(taylor_ito_table(4, legendre, 2), (1, 1, 2, 2))
    with pytest.raises(UnsupportedError):
        exact_mse_theorem5(taylor_ito_table(2, legendre, 2), (0, 1))
    with pytest.raises(ContractError):
        exact_mse_theorem5(taylor_ito_table(2, legendre, 2), (1, 2, 3))


@pytest.mark.parametrize("k icomp tol expected".split(),
                         ((2, (1, 2), 0.01, 12),
                          (2, (1, 1), 0.6, 0),
                          (2, (1, 2), 0.25, 0),
                          (2, (1, 2), 0.08, 2),
                          (1, (1,), 1e-9, 0)))
def test_select_truncation(legendre, k, icomp, tol, expected):
    assert select_truncation(k, icomp, legendre, ONE, tol) == expected


def test_select_truncation_hits_the_cap(legendre):
    with pytest.raises(CapacityError) as excinfo:
        select_truncation(2, (1, 2), legendre, ONE, 1e-6)
    assert excinfo.value.p == 256
    assert excinfo.value.tol == 1e-6
    assert excinfo.value.achieved == pytest.approx(1.0 / (8 * 256 + 4), rel=1e-8)


def test_select_truncation_builds_once_and_grows(legendre, monkeypatch):
    sizes = []

    def recording_build(basis, weights, p, k=None, exact=False):
        sizes.append(p)
        return build_table(basis, weights, p, k=k, exact=exact)
    monkeypatch.setattr(error_analysis, 'build_table', recording_build)
    assert select_truncation(2, (1, 2), legendre, ONE, 0.0021) == 60
    assert sizes == [8]


@pytest.mark.parametrize("tol", (0.0, -1.0))
def test_select_truncation_needs_positive_tolerance(legendre, tol):
    with pytest.raises(DomainError):
        select_truncation(2, (1, 2), legendre, ONE, tol)


def test_rate_probe_for_double_integrals(legendre):
    probe = convergence_rate_probe(2, legendre, ONE, (4, 8, 16, 32, 64))
    assert not probe.exact
    assert -1.3 <= probe.slope <= -0.8
    assert probe.g_constant == pytest.approx(max(p / (8 * p + 4) for p in (4, 8, 16, 32, 64)))


def test_rate_probe_single_integral_is_exact(legendre):
    probe = convergence_rate_probe(1, legendre, ONE, (1, 2, 4, 8))
    assert probe.exact
    assert probe.slope is None
    assert probe.residuals == [0.0] * 4


@pytest.mark.parametrize("p_values", ((4, 8, 16), (0, 2, 4, 8), (4, 4, 8, 8, 16)))
def test_rate_probe_rejects_bad_truncations(legendre, p_values):
    with pytest.raises(DomainError):
        convergence_rate_probe(2, legendre, ONE, p_values)


@pytest.mark.slow
def test_rate_probe_triple_integrals(any_basis):
    probe = convergence_rate_probe(3, any_basis, ONE, (4, 8, 16, 32, 64))
    assert -1.4 <= probe.slope <= -0.7
    assert math.isfinite(probe.g_constant)


def test_error_report_distinct(legendre):
    report = error_report(taylor_ito_table(2, legendre, 1), (1, 2), tol=0.01)
    assert report.residual == pytest.approx(1.0 / 12.0)
    assert report.mse_bound == pytest.approx(1.0 / 6.0)
    assert report.exact_mse == pytest.approx(1.0 / 12.0)
    assert report.moment_bounds[2] == pytest.approx(12.0)
    assert report.selected_p == 12
    assert report.to_dict()['components'] == [1, 2]


def test_error_report_repeated(legendre):
    report = error_report(taylor_ito_table(2, legendre, 3), (1, 1), moments=(1,))
    assert report.exact_mse <= 1e-12
    assert report.selected_p is None
    assert list(report.moment_bounds) == [1]


def test_error_report_without_exact_value(legendre):
    assert error_report(taylor_ito_table(4, legendre, 2), (1, 1, 2, 2)).exact_mse is None
    with pytest.warns(ValidityWarning):
        assert error_report(taylor_ito_table(2, legendre, 2), (0, 1)).exact_mse is None


@pytest.mark.slow
def test_partly_repeated_triple_error_matches_monte_carlo(legendre):
    table = taylor_ito_table(3, legendre, 2)
    exact = exact_mse_theorem5(table, (1, 1, 2))
    assert exact == pytest.approx(0.025125, rel=1e-3)
    estimate = empirical_mse(table, (1, 1, 2), 5000, 1024, SeedSpec(41))
    assert abs(estimate.estimate - exact) <= 3.0 * estimate.stderr + 10.0 / 1024

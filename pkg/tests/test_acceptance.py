"""End-to-end reproduction runs; minutes each, deselect with -m 'not slow'."""
import json
import math

import numpy as np
import pytest

from ito_fourier.bases import make_basis
from ito_fourier.cli import main
from ito_fourier.coefficients import residual, taylor_ito_table
from ito_fourier.error_analysis import (
    convergence_rate_probe,
    exact_mse_distinct,
    exact_mse_theorem5,
    moment_constant,
    mse_upper_bound,
)
from ito_fourier.models import IntegrationInterval, SeedSpec, WeightFunction
from ito_fourier.oracle import empirical_mse, simulate_paths
from ito_fourier.sde_demo import coarse_increments, run_strong_convergence
from ito_fourier.serialization import body_of

pytestmark = pytest.mark.slow

UNIT = IntegrationInterval(0.0, 1.0)


def _allowance(table, N):
    return 10.0 * table.interval.length ** table.k / N


@pytest.mark.parametrize("q expected".split(), ((0, 1.0 / 4.0), (1, 1.0 / 12.0), (5, 1.0 / 44.0), (12, 1.0 / 100.0)))
def test_double_integral_error_matches_closed_form(q, expected):
    table = taylor_ito_table(2, make_basis('legendre', UNIT), q)
    assert residual(table) == pytest.approx(expected, abs=1e-12)
    estimate = empirical_mse(table, (1, 2), 10_000, 4096, SeedSpec(1, q))
    assert abs(estimate.estimate - expected) <= 3.0 * estimate.stderr + _allowance(table, 4096)


@pytest.mark.parametrize("p", (0, 2, 4))
def test_triple_integral_error_matches_table(p):
    table = taylor_ito_table(3, make_basis('legendre', UNIT), p)
    estimate = empirical_mse(table, (1, 2, 3), 5000, 4096, SeedSpec(2, p))
    assert abs(estimate.estimate - exact_mse_distinct(table)) <= 3.0 * estimate.stderr + _allowance(table, 4096)


BOUND_GRID = [(kind, icomp, p)
              for kind in ('legendre', 'trigonometric')
              for icomp in ((1, 2), (1, 1), (1, 2, 3), (1, 1, 2), (2, 1, 2))
              for p in range(9)]


@pytest.mark.parametrize("kind icomp p".split(), BOUND_GRID)
def test_error_and_fourth_moment_stay_below_bounds(kind, icomp, p):
    table = taylor_ito_table(len(icomp), make_basis(kind, UNIT), p)
    estimate = empirical_mse(table, icomp, 2000, 512, SeedSpec(3, p))
    allowance = _allowance(table, 512)
    assert estimate.estimate <= mse_upper_bound(table) + 3.0 * estimate.stderr + allowance
    fourth_bound = moment_constant(2, table.k) * residual(table) ** 2
    assert estimate.fourth_moment <= fourth_bound + 3.0 * estimate.fourth_stderr + allowance


def test_scaled_fourth_moment_stays_bounded():
    basis = make_basis('legendre', UNIT)
    scaled = []
    for p in (4, 8, 16, 32, 64):
        estimate = empirical_mse(taylor_ito_table(2, basis, p), (1, 2), 4000, 4096, SeedSpec(4, p))
        scaled.append(p * p * estimate.fourth_moment)
    assert max(scaled) <= 4.0 * min(scaled)


@pytest.mark.parametrize("k", (2, 3))
@pytest.mark.parametrize("kind", ('legendre', 'trigonometric'))
def test_residual_decays_like_one_over_p(kind, k):
    probe = convergence_rate_probe(k, make_basis(kind, UNIT), WeightFunction.one(), (4, 8, 16, 32, 64))
    assert -1.3 <= probe.slope <= -0.7


def test_repeated_double_integral_error_is_pure_discretisation():
    table = taylor_ito_table(2, make_basis('legendre', UNIT), 0)
    assert exact_mse_theorem5(table, (1, 1)) <= 1e-12
    grid = (256, 1024, 4096)
    errors = [empirical_mse(table, (1, 1), 2000, N, SeedSpec(5, N)).estimate for N in grid]
    slope = np.polyfit(np.log(grid), np.log(errors), 1)[0]
    assert abs(slope + 1.0) <= 0.3


def test_scheme_consumes_the_reference_increments():
    first = simulate_paths(SeedSpec(6), 2, 64, UNIT, 3, key=(0,))
    second = simulate_paths(SeedSpec(6), 2, 64, UNIT, 3, key=(0,))
    assert np.array_equal(coarse_increments(first.increments, 8), coarse_increments(second.increments, 8))
    assert np.allclose(coarse_increments(first.increments, 8).sum(axis=-1), first.increments.sum(axis=-1))


def test_scheme_strong_orders():
    selected = run_strong_convergence(SeedSpec(7), trials=2000)
    assert abs(selected.order - 1.0) <= 0.15
    fixed = run_strong_convergence(SeedSpec(7), q=0, trials=2000)
    assert abs(fixed.order - 0.5) <= 0.15


def test_scheme_error_does_not_grow_with_truncation():
    runs = [run_strong_convergence(SeedSpec(8), steps=(16,), q=q, trials=1000, n_fine=1024) for q in (0, 2, 6, 12)]
    for coarse, fine in zip(runs, runs[1:]):
        assert fine.errors[0] <= coarse.errors[0] + 2.0 * math.hypot(coarse.stderrs[0], fine.stderrs[0])


COMMAND_LINES = (
    ['coeffs', '--k', '3', '--p', '3', '--exact'],
    ['residual', '--k', '2', '--tol', '0.02'],
    ['sample', '--k', '2', '--p', '4', '--draws', '20'],
    ['mse', '--k', '3', '--p', '2', '--components', '1,1,2'],
    ['validate', '--k', '2', '--p', '2', '--trials', '600', '--N', '128'],
    ['rate', '--k', '2'],
    ['sde-demo', '--trials', '500', '--N', '256', '--steps', '4,8,16'],
)


@pytest.mark.parametrize("argv", COMMAND_LINES, ids=lambda argv: argv[0])
def test_bodies_are_identical_across_worker_counts(tmp_path, argv):
    bodies = []
    for workers in (1, 4, 8):
        output = tmp_path / f"{argv[0]}-{workers}.out"
        assert main([*argv, '--seed', '77', '--workers', str(workers), '--output', str(output)]) == 0
        bodies.append(body_of(output.read_text(encoding='utf-8')))
    assert bodies[0] == bodies[1] == bodies[2]
    if argv[0] != 'sde-demo':
        json.loads(bodies[0])

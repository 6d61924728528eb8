from itertools import permutations
from typing import Iterable, Optional, Sequence
import logging
import math

import numpy as np

from .bases import OrthonormalBasis
from .coefficients import (
    RESIDUAL_FLOOR,
    CoefficientTable,
    as_weights,
    floor_residual,
    build_table,
    dense_cap,
    residual,
    residual_series,
)
from .exceptions import CapacityError, ContractError, DomainError, UnsupportedError
from .expansion import warn_time_component
from .models import ErrorReport, RateProbe

logger = logging.getLogger(__name__)

P_MAX = 256
SYMMETRISED_K_MAX = 3
MIN_PROBE_POINTS = 4
SEARCH_START = 8


def mse_upper_bound(table: CoefficientTable) -> float:
    """k! times the Parseval residual."""
    return math.factorial(table.k) * residual(table)


def moment_constant(n: int, k: int) -> int:
    """(k!)^(2n) (n(2n - 1))^(n(k - 1)) (2n - 1)!!"""
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    double_factorial = math.prod(range(2 * n - 1, 0, -2))
    return math.factorial(k) ** (2 * n) * (n * (2 * n - 1)) ** (n * (k - 1)) * double_factorial


def moment_bound(table: CoefficientTable, n: int) -> float:
    """
    Bound on E|J - J^p|^(2n).

    For n = 1 this is the mean-square bound k! * residual, which is sharper
    than the general constant at n = 1.
    """
    if n < 1:
        raise DomainError(f"moment order n must be at least 1, got {n}")
    if n == 1:
        return mse_upper_bound(table)
    return float(moment_constant(n, table.k)) * residual(table) ** n


def exact_mse_distinct(table: CoefficientTable) -> float:
    """Exact mean-square error for pairwise-distinct nonzero components."""
    return residual(table)


def _is_distinct(icomp: Sequence[int]) -> bool:
    return 0 not in icomp and len(set(icomp)) == len(icomp)


def exact_mse_theorem5(table: CoefficientTable, icomp: Sequence[int]) -> float:
    """
    Exact mean-square error for k <= 3 and any repetition pattern:

        ||K||^2 - sum_j C_j * sum_sigma C_{sigma(j)}

    where sigma runs over position permutations that leave icomp unchanged.
    """
    icomp = tuple(icomp)
    if len(icomp) != table.k:
        raise ContractError(f"table has k={table.k} but {len(icomp)} components were given")
    if table.k > SYMMETRISED_K_MAX:
        raise UnsupportedError(f"exact mean-square error is implemented for k <= {SYMMETRISED_K_MAX}")
    if 0 in icomp:
        raise UnsupportedError("exact mean-square error needs Wiener components only")
    symmetrised = np.zeros_like(table.values)
    for sigma in permutations(range(table.k)):
        if all(icomp[s] == icomp[d] for d, s in enumerate(sigma)):
            symmetrised += np.transpose(table.values, sigma)
    value = table.norm - float(np.sum(table.values * symmetrised))
    return floor_residual(value, table.norm)


def _truncation_errors(table: CoefficientTable, distinct: bool):
    factor = 1 if distinct else math.factorial(table.k)
    return [factor * value for value in residual_series(table)]


def select_truncation(k: int, icomp: Sequence[int], basis: OrthonormalBasis, weights, tol: float) -> int:
    """
    Smallest p whose error meets tol: the exact error for pairwise-distinct
    components, k! * residual otherwise.
    """
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    icomp = tuple(icomp)
    if len(icomp) != k:
        raise ContractError(f"expected {k} components, got {len(icomp)}")
    weights = as_weights(weights, k)
    distinct = _is_distinct(icomp)
    cap = min(P_MAX, dense_cap(k))
    size = min(SEARCH_START, cap)
    table = build_table(basis, weights, size)
    while True:
        errors = _truncation_errors(table, distinct)
        for p, error in enumerate(errors):
            if error <= tol + RESIDUAL_FLOOR:
                logger.info("selected p=%d for k=%d (error %.3g <= %.3g)", p, k, error, tol)
                return p
        if size >= cap:
            raise CapacityError(
                f"error {errors[-1]:.3g} still above {tol:.3g} at the cap p={cap} for k={k}",
                achieved=errors[-1], p=cap, tol=tol)
        size = min(2 * size, cap)
        table = table.grow(size)


def convergence_rate_probe(k: int, basis: OrthonormalBasis, weights, p_values: Iterable[int]) -> RateProbe:
    """Least-squares slope of log residual against log p, with max p * residual as a G_k proxy."""
    p_values = sorted(set(int(p) for p in p_values))
    if len(p_values) < MIN_PROBE_POINTS:
        raise DomainError(f"rate probe needs at least {MIN_PROBE_POINTS} truncations, got {len(p_values)}")
    if p_values[0] < 1:
        raise DomainError("rate probe truncations must be positive")
    table = build_table(basis, as_weights(weights, k), p_values[-1])
    series = residual_series(table)
    residuals = [series[p] for p in p_values]
    g_constant = max(p * r for p, r in zip(p_values, residuals))
    positive = [(p, r) for p, r in zip(p_values, residuals) if r > 0.0]
    if len(positive) < 2:
        logger.info("residuals vanish for k=%d; expansion is exact", k)
        return RateProbe(p_values, residuals, None, g_constant, exact=True)
    logs = np.log(np.array(positive))
    slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    logger.info("residual slope %.3f for k=%d over p=%s", slope, k, p_values)
    return RateProbe(p_values, residuals, slope, g_constant)


def error_report(table: CoefficientTable, icomp: Sequence[int], moments: Sequence[int] = (1, 2),
                 tol: Optional[float] = None) -> ErrorReport:
    """Collect the residual, the bounds and, where available, the exact error for one table."""
    icomp = tuple(icomp)
    if len(icomp) != table.k:
        raise ContractError(f"table has k={table.k} but {len(icomp)} components were given")
    warn_time_component(icomp, table.interval)
    exact = None
    if _is_distinct(icomp):
        exact = exact_mse_distinct(table)
    elif table.k <= SYMMETRISED_K_MAX and 0 not in icomp:
        exact = exact_mse_theorem5(table, icomp)
    selected = None
    if tol is not None:
        selected = select_truncation(table.k, icomp, table.basis, table.weights, tol)
    return ErrorReport(
        k=table.k,
        p=table.p,
        residual=residual(table),
        mse_bound=mse_upper_bound(table),
        exact_mse=exact,
        moment_bounds={n: moment_bound(table, n) for n in moments},
        selected_p=selected,
        components=icomp,
    )

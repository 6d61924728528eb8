"""
Brute-force validation on fine Wiener grids.

Paths are simulated on a uniform grid, iterated integrals are taken as
left-point (Ito) iterated sums, and the discretised zeta are read off the same
path so the expansion and the oracle are coupled pathwise.
"""
from itertools import permutations
from typing import Optional, Sequence, Tuple
import logging
import math

import numpy as np

from .bases import OrthonormalBasis
from .exceptions import ContractError, DomainError, UnsupportedError
from .expansion import evaluate_expansion
from .models import IntegrationInterval, MonteCarloEstimate, WeightFunction, WienerPath, ZetaMatrix
from .runner import CHUNK_SIZE, MonteCarloRunner, chunk_sizes
from .sampling import SeedLike, generator

logger = logging.getLogger(__name__)

MIN_TRIALS = 100
MULTIPLE_SUM_K_MAX = 3
MULTIPLE_SUM_N_MAX = 64


def simulate_paths(seed: SeedLike, m: int, N: int, interval: IntegrationInterval, count: int,
                   key: Tuple[int, ...] = ()) -> WienerPath:
    """count independent paths, increments of shape (count, m, N)."""
    if N < 1:
        raise DomainError(f"grid size N must be at least 1, got {N}")
    if m < 1:
        raise DomainError(f"need at least one Wiener component, got m={m}")
    scale = math.sqrt(interval.length / N)
    increments = np.empty((count, m, N))
    for i in range(1, m + 1):
        increments[:, i - 1, :] = scale * generator(seed, *key, i).standard_normal((count, N))
    return WienerPath(interval, increments)


def simulate_path(seed: SeedLike, m: int, N: int, interval: IntegrationInterval) -> WienerPath:
    batch = simulate_paths(seed, m, N, interval, 1)
    return WienerPath(interval, batch.increments[0])


def _weights(weights: Optional[Sequence[WeightFunction]], k: int) -> Tuple[WeightFunction, ...]:
    if weights is None:
        return (WeightFunction.one(),) * k
    weights = tuple(weights)
    if len(weights) != k:
        raise ContractError(f"{len(weights)} weights for {k} components")
    return weights


def iterated_integral_on_path(path: WienerPath, icomp: Sequence[int],
                              weights: Optional[Sequence[WeightFunction]] = None):
    """
    Sum over l_1 < ... < l_k of prod_s psi_s(tau_{l_s}) dw^(i_s)_{l_s}.

    One exclusive prefix sum per level keeps the cost at O(kN).
    """
    icomp = tuple(icomp)
    if not icomp:
        raise DomainError("multiplicity k must be at least 1")
    weights = _weights(weights, len(icomp))
    nodes = path.nodes
    running = None
    for i, weight in zip(icomp, weights):
        level = np.asarray(weight(nodes), dtype=float) * path.component(i)
        if running is None:
            running = level
        else:
            before = np.cumsum(running, axis=-1) - running
            running = level * before
    result = running.sum(axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def zeta_from_path(path: WienerPath, basis: OrthonormalBasis, p: int) -> ZetaMatrix:
    """Left-point sums of phi_j(tau_l) dw_l; row 0 is the exact time row."""
    if p < 0:
        raise DomainError(f"truncation p must be non-negative, got {p}")
    if basis.interval != path.interval:
        raise ContractError(f"basis on {basis.interval} does not match path on {path.interval}")
    phi = basis.matrix(p, path.nodes)
    wiener = path.increments @ phi
    time = np.broadcast_to(basis.time_row(p), wiener.shape[:-2] + (1, p + 1))
    return ZetaMatrix(np.concatenate([time, wiener], axis=-2))


def empirical_mse(table, icomp: Sequence[int], trials: int, N: int, seed: SeedLike,
                  runner: Optional[MonteCarloRunner] = None) -> MonteCarloEstimate:
    """
    Mean over simulated paths of (oracle - expansion)^2.

    Trials run in chunks of CHUNK_SIZE; chunk c always uses the paths keyed
    by c, and errors are reduced in chunk order.
    """
    if trials < MIN_TRIALS:
        raise DomainError(f"empirical_mse needs at least {MIN_TRIALS} trials, got {trials}")
    icomp = tuple(icomp)
    if len(icomp) != table.k:
        raise ContractError(f"table has k={table.k} but {len(icomp)} components were given")
    m = max(1, max(icomp))
    sizes = chunk_sizes(trials, CHUNK_SIZE)
    runner = runner or MonteCarloRunner()

    def task(chunk: int) -> np.ndarray:
        paths = simulate_paths(seed, m, N, table.interval, sizes[chunk], key=(chunk,))
        exact = iterated_integral_on_path(paths, icomp, table.weights)
        approx = evaluate_expansion(table, icomp, zeta_from_path(paths, table.basis, table.p))
        return np.asarray(exact - approx)

    errors = np.concatenate(runner.map(task, len(sizes)))
    squared = errors ** 2
    centred = (errors - errors.mean()) ** 4
    estimate = MonteCarloEstimate(
        estimate=float(squared.mean()),
        stderr=float(squared.std(ddof=1) / math.sqrt(trials)),
        fourth_moment=float(centred.mean()),
        fourth_stderr=float(centred.std(ddof=1) / math.sqrt(trials)),
        trials=trials,
        n_steps=N,
    )
    logger.info("empirical mse %.6g +- %.2g over %d trials, N=%d",
                estimate.estimate, estimate.stderr, trials, N)
    return estimate


def _terms(path: WienerPath, basis: OrthonormalBasis, jtuple: Sequence[int], icomp: Sequence[int]):
    jtuple, icomp = tuple(jtuple), tuple(icomp)
    if len(jtuple) != len(icomp):
        raise ContractError(f"{len(jtuple)} indices for {len(icomp)} components")
    if not 1 <= len(jtuple) <= MULTIPLE_SUM_K_MAX:
        raise UnsupportedError(f"multiple sums are limited to 1 <= k <= {MULTIPLE_SUM_K_MAX}")
    if basis.interval != path.interval:
        raise ContractError(f"basis on {basis.interval} does not match path on {path.interval}")
    nodes = path.nodes
    return [basis.values(j, nodes) * path.component(i) for j, i in zip(jtuple, icomp)]


def multiple_sum_check(path: WienerPath, basis: OrthonormalBasis, jtuple: Sequence[int],
                       icomp: Sequence[int]) -> float:
    """Sum over pairwise-distinct grid tuples of prod_s phi_{j_s}(tau_{l_s}) dw^(i_s)_{l_s}."""
    terms = _terms(path, basis, jtuple, icomp)
    if path.increments.ndim != 2:
        raise ContractError("multiple_sum_check takes a single path")
    if path.n_steps > MULTIPLE_SUM_N_MAX:
        raise UnsupportedError(f"exhaustive multiple sums are limited to N <= {MULTIPLE_SUM_N_MAX}")
    total = 0.0
    for tuple_ in permutations(range(path.n_steps), len(terms)):
        total += math.prod(term[l] for term, l in zip(terms, tuple_))
    return float(total)


def diagonal_sum(path: WienerPath, basis: OrthonormalBasis, jtuple: Sequence[int],
                 icomp: Sequence[int]):
    """
    prod of discretised zeta minus the distinct-tuple sum, by inclusion-exclusion
    over coinciding grid indices (any N, batched paths allowed).
    """
    terms = _terms(path, basis, jtuple, icomp)

    def power_sum(*levels):
        return np.prod([terms[s] for s in levels], axis=0).sum(axis=-1)

    if len(terms) == 1:
        result = np.zeros(terms[0].shape[:-1])
    elif len(terms) == 2:
        result = power_sum(0, 1)
    else:
        result = (power_sum(0, 1) * power_sum(2) + power_sum(0, 2) * power_sum(1)
                  + power_sum(1, 2) * power_sum(0) - 2.0 * power_sum(0, 1, 2))
    return float(result) if np.ndim(result) == 0 else result

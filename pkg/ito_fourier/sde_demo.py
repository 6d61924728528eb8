"""
Milstein scheme for the noncommutative test system

    dX1 = dW1,  dX2 = X1 dW2,  X(0) = 0,

whose second component is the double integral J11^(1,2) itself. The only
error of the scheme comes from truncating J11 on every step.
"""
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from .bases import make_basis
from .coefficients import CoefficientTable, build_table
from .error_analysis import select_truncation
from .exceptions import DomainError
from .expansion import evaluate_expansion
from .models import IntegrationInterval, SchemeRun, WeightFunction, WienerPath
from .oracle import iterated_integral_on_path, simulate_paths, zeta_from_path
from .runner import CHUNK_SIZE, MonteCarloRunner, chunk_sizes
from .sampling import SeedLike

logger = logging.getLogger(__name__)

DEFAULT_STEPS = (8, 16, 32, 64)
DEFAULT_FINE_STEPS = 4096
MIN_SCHEME_TRIALS = 500
LEVY_COMPONENTS = (1, 2)


def milstein_step(state: np.ndarray, delta: float, increments: np.ndarray, j11_values) -> np.ndarray:
    """
    One step from state (..., 2) with increments (..., 2) = (dW1, dW2) and the
    approximated J11^(1,2) over the step.
    """
    state = np.asarray(state, dtype=float)
    increments = np.asarray(increments, dtype=float)
    updated = np.empty(np.broadcast_shapes(state.shape, increments.shape))
    updated[..., 0] = state[..., 0] + increments[..., 0]
    updated[..., 1] = state[..., 1] + state[..., 0] * increments[..., 1] + j11_values
    return updated


def step_truncation(delta: float, horizon: float = 1.0, basis_kind: str = 'legendre') -> int:
    """q whose J11 error per step keeps the accumulated mean-square error at delta^2."""
    basis = make_basis(basis_kind, IntegrationInterval(0.0, delta))
    return select_truncation(2, LEVY_COMPONENTS, basis, WeightFunction.one(), delta ** 3 / horizon)


def coarse_increments(increments: np.ndarray, steps: int) -> np.ndarray:
    """Sum fine increments (..., m, N) over blocks of N // steps."""
    fine = increments.shape[-1]
    if fine % steps:
        raise DomainError(f"{steps} steps do not divide the fine grid of {fine}")
    return increments.reshape(increments.shape[:-1] + (steps, fine // steps)).sum(axis=-1)


def _step_paths(increments: np.ndarray, steps: int, delta: float) -> WienerPath:
    # (count, m, N) -> (count, steps, m, N // steps), every step on [0, delta]
    fine = increments.shape[-1]
    blocks = increments.reshape(increments.shape[:-1] + (steps, fine // steps))
    return WienerPath(IntegrationInterval(0.0, delta), np.moveaxis(blocks, -2, -3))


def _scheme_endpoint(increments: np.ndarray, steps: int, table: CoefficientTable) -> np.ndarray:
    delta = table.interval.length
    zeta = zeta_from_path(_step_paths(increments, steps, delta), table.basis, table.p)
    j11 = evaluate_expansion(table, LEVY_COMPONENTS, zeta)
    coarse = coarse_increments(increments, steps)
    state = np.zeros(increments.shape[:-2] + (2,))
    for s in range(steps):
        state = milstein_step(state, delta, coarse[..., s], j11[..., s])
    return state[..., 1]


def run_strong_convergence(seed: SeedLike, steps: Sequence[int] = DEFAULT_STEPS, q: Optional[int] = None,
                           trials: int = 1000, n_fine: int = DEFAULT_FINE_STEPS, horizon: float = 1.0,
                           basis_kind: str = 'legendre',
                           runner: Optional[MonteCarloRunner] = None) -> SchemeRun:
    """
    Strong error E|X2(T) - X2_hat(T)| for each step count, against the fine
    left-point reference built from the same increments.
    """
    if trials < MIN_SCHEME_TRIALS:
        raise DomainError(f"strong convergence runs need at least {MIN_SCHEME_TRIALS} trials, got {trials}")
    steps = sorted(set(int(n) for n in steps))
    if not steps or steps[0] < 1:
        raise DomainError(f"step counts must be positive, got {steps}")
    if q is not None and q < 0:
        raise DomainError(f"truncation must be non-negative, got {q}")
    for n in steps:
        if n_fine % n:
            raise DomainError(f"{n} steps do not divide the fine grid of {n_fine}")

    interval = IntegrationInterval(0.0, horizon)
    tables: Dict[int, CoefficientTable] = {}
    truncations: List[int] = []
    for n in steps:
        delta = horizon / n
        q_n = step_truncation(delta, horizon, basis_kind) if q is None else q
        basis = make_basis(basis_kind, IntegrationInterval(0.0, delta))
        tables[n] = build_table(basis, WeightFunction.one(), q_n, k=2)
        truncations.append(q_n)
    logger.info("strong convergence over steps %s with truncations %s", steps, truncations)

    sizes = chunk_sizes(trials, CHUNK_SIZE)
    runner = runner or MonteCarloRunner()

    def task(chunk: int) -> np.ndarray:
        paths = simulate_paths(seed, 2, n_fine, interval, sizes[chunk], key=(chunk,))
        reference = iterated_integral_on_path(paths, LEVY_COMPONENTS)
        return np.stack([np.abs(reference - _scheme_endpoint(paths.increments, n, tables[n]))
                         for n in steps], axis=-1)

    errors = np.concatenate(runner.map(task, len(sizes)), axis=0)
    means = errors.mean(axis=0)
    stderrs = errors.std(axis=0, ddof=1) / math.sqrt(trials)
    step_sizes = [horizon / n for n in steps]
    order = _fitted_order(step_sizes, means)
    return SchemeRun(step_sizes, truncations, trials, [float(e) for e in means],
                     [float(s) for s in stderrs], order)


def _fitted_order(step_sizes: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    points: List[Tuple[float, float]] = [(h, e) for h, e in zip(step_sizes, errors) if e > 0.0]
    if len(points) < 2:
        return None
    logs = np.log(np.array(points))
    return float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])

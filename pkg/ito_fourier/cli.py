from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple
import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .bases import BASES, make_basis
from .coefficients import build_table, residual
from .error_analysis import (
    convergence_rate_probe,
    error_report,
    mse_upper_bound,
    select_truncation,
)
from .exceptions import CapacityError, ContractError, DomainError, ExpansionError, UnsupportedError
from .expansion import evaluate_expansion
from .models import IntegrationInterval, SeedSpec, WeightFunction
from .oracle import empirical_mse
from .runner import MonteCarloRunner, default_workers
from .sampling import draw_zeta_batch
from .sde_demo import DEFAULT_FINE_STEPS, DEFAULT_STEPS, run_strong_convergence
from .serialization import dumps_csv, dumps_json, write_text

logger = logging.getLogger(__name__)

COMMANDS = ('coeffs', 'residual', 'sample', 'mse', 'validate', 'rate', 'sde-demo')
SEED_ENVIRONMENT = 'ITO_FOURIER_SEED'
DEFAULT_SEED = 20200402
DEFAULT_P_VALUES = (4, 8, 16, 32, 64)
DISCRETIZATION_ALLOWANCE = 10.0

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    """Raised instead of argparse's own exit so main can pick the exit code."""


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class CommandSpec:
    """Fully resolved command line; recorded verbatim in every output header."""
    command: str
    basis: str = 'legendre'
    t: float = 0.0
    T: float = 1.0
    k: int = 2
    p: Optional[int] = None
    tol: Optional[float] = None
    components: Optional[Tuple[int, ...]] = None
    weights: Optional[Tuple[Tuple[float, ...], ...]] = None
    seed: int = DEFAULT_SEED
    seed_source: str = 'default'
    trials: int = 1000
    N: int = 4096
    draws: int = 10
    exact: bool = False
    workers: int = field(default_factory=default_workers)
    format: str = 'json'
    output: Optional[str] = None
    p_values: Tuple[int, ...] = DEFAULT_P_VALUES
    steps: Tuple[int, ...] = DEFAULT_STEPS
    q: Optional[int] = None

    def validate(self) -> None:
        """Check flag combinations before any computation."""
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command '{self.command}'")
        if self.basis not in BASES:
            raise DomainError(f"unknown basis '{self.basis}', expected one of {sorted(BASES)}")
        self.interval()
        if self.k < 1:
            raise DomainError(f"--k must be at least 1, got {self.k}")
        if self.p is not None and self.p < 0:
            raise DomainError(f"--p must be non-negative, got {self.p}")
        if self.p is not None and self.tol is not None:
            raise ContractError("give either --p or --tol, not both")
        if self.tol is not None and not self.tol > 0:
            raise DomainError(f"--tol must be positive, got {self.tol}")
        if self.components is not None:
            if len(self.components) != self.k:
                raise ContractError(f"--components has {len(self.components)} entries for k={self.k}")
            if any(i < 0 for i in self.components):
                raise DomainError("--components must be non-negative")
        if self.weights is not None and len(self.weights) not in (1, self.k):
            raise ContractError(f"--weights has {len(self.weights)} levels for k={self.k}")
        if self.workers < 1:
            raise DomainError(f"--workers must be positive, got {self.workers}")
        if self.draws < 1:
            raise DomainError(f"--draws must be positive, got {self.draws}")
        if self.N < 1:
            raise DomainError(f"--N must be positive, got {self.N}")
        if self.format not in ('json', 'csv'):
            raise DomainError(f"--format must be json or csv, got {self.format}")
        if self.command == 'validate' and self.trials < 100:
            raise DomainError("validate needs --trials >= 100")
        if self.command == 'sde-demo':
            if self.trials < 500:
                raise DomainError("sde-demo needs --trials >= 500")
            if any(self.N % n for n in self.steps):
                raise ContractError(f"--N={self.N} must be a multiple of every step count {self.steps}")

    def interval(self) -> IntegrationInterval:
        return IntegrationInterval(self.t, self.T)

    def resolved_components(self) -> Tuple[int, ...]:
        return self.components if self.components is not None else tuple(range(1, self.k + 1))

    def resolved_weights(self) -> Tuple[WeightFunction, ...]:
        if self.weights is None:
            return (WeightFunction.one(),) * self.k
        weights = tuple(WeightFunction.polynomial(c) for c in self.weights)
        return weights * self.k if len(weights) == 1 else weights

    def to_header(self) -> Dict:
        header = asdict(self)
        header['components'] = list(self.resolved_components())
        return header


def resolve_seed(flag: Optional[int], environ=None) -> Tuple[int, str]:
    """--seed beats the environment variable, which beats the fixed default."""
    environ = os.environ if environ is None else environ
    if flag is not None:
        return int(flag), 'flag'
    if environ.get(SEED_ENVIRONMENT):
        try:
            return int(environ[SEED_ENVIRONMENT]), 'environment'
        except ValueError:
            raise DomainError(f"{SEED_ENVIRONMENT} must be an integer, got {environ[SEED_ENVIRONMENT]!r}")
    return DEFAULT_SEED, 'default'


def _int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(',') if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _weight_list(text: str) -> Tuple[Tuple[float, ...], ...]:
    try:
        return tuple(tuple(float(c) for c in level.split(',')) for level in text.split(';'))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected monomial coefficients like '1,0.5;1', got {text!r}")


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--basis', choices=sorted(BASES), default='legendre', help='Orthonormal system')
    common.add_argument('--t', type=float, default=0.0, help='Left end of the interval')
    common.add_argument('--T', type=float, default=1.0, help='Right end of the interval')
    common.add_argument('--k', type=int, default=2, help='Multiplicity of the iterated integral')
    common.add_argument('--p', type=int, help='Truncation of every index')
    common.add_argument('--tol', type=float, help='Pick the smallest truncation meeting this error')
    common.add_argument('--components', type=_int_list, help='Wiener components i_1,...,i_k (0 is time)')
    common.add_argument('--weights', type=_weight_list,
                        help="Monomial coefficients of psi per level, levels separated by ';'")
    common.add_argument('--seed', type=int, help=f'Master seed (else ${SEED_ENVIRONMENT}, else {DEFAULT_SEED})')
    common.add_argument('--trials', type=int, default=1000, help='Monte Carlo trials')
    common.add_argument('--N', type=int, default=DEFAULT_FINE_STEPS, help='Fine grid size of simulated paths')
    common.add_argument('--draws', type=int, default=10, help='Number of sampled expansion values')
    common.add_argument('--exact', action='store_true', help='Attach exact rationals to coefficient tables')
    common.add_argument('--workers', type=int, default=default_workers(), help='Monte Carlo worker threads')
    common.add_argument('--format', choices=('json', 'csv'), help='Output format')
    common.add_argument('--output', help='Output file (stdout when omitted)')
    common.add_argument('--p-values', type=_int_list, default=DEFAULT_P_VALUES, dest='p_values',
                        help='Truncations probed by rate')
    common.add_argument('--steps', type=_int_list, default=DEFAULT_STEPS, help='Step counts for sde-demo')
    common.add_argument('--q', type=int, help='Fixed per-step truncation for sde-demo')
    common.add_argument('--verbose', action='store_true', help='Log progress information')
    common.add_argument('--debug', action='store_true', help='Log debug information')

    parser = ArgumentParser(prog='ito-fourier',
                            description='Fourier expansions of iterated Ito stochastic integrals')
    subparsers = parser.add_subparsers(dest='command', required=True)
    descriptions = {
        'coeffs': 'Write the Fourier coefficient table',
        'residual': 'Write the Parseval residual and k! * residual',
        'sample': 'Sample values of the truncated expansion',
        'mse': 'Write exact mean-square errors and bounds',
        'validate': 'Check the predicted error against the path oracle',
        'rate': 'Fit the decay rate of the residual in p',
        'sde-demo': 'Strong convergence of the Milstein demo',
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=descriptions[command])
    return parser


def parse_command(argv: Optional[List[str]] = None, environ=None) -> Tuple[CommandSpec, argparse.Namespace]:
    args = build_parser().parse_args(argv)
    seed, source = resolve_seed(args.seed, environ)
    SeedSpec(seed)  # 64-bit range check
    spec = CommandSpec(
        command=args.command,
        basis=args.basis,
        t=args.t,
        T=args.T,
        k=args.k,
        p=args.p,
        tol=args.tol,
        components=args.components,
        weights=args.weights,
        seed=seed,
        seed_source=source,
        trials=args.trials,
        N=args.N,
        draws=args.draws,
        exact=args.exact,
        workers=args.workers,
        format=args.format or ('csv' if args.command == 'sde-demo' else 'json'),
        output=args.output,
        p_values=args.p_values,
        steps=args.steps,
        q=args.q,
    )
    spec.validate()
    return spec, args


def _table(spec: CommandSpec):
    basis = make_basis(spec.basis, spec.interval())
    weights = spec.resolved_weights()
    p = spec.p
    if p is None:
        p = 0 if spec.tol is None else select_truncation(
            spec.k, spec.resolved_components(), basis, weights, spec.tol)
    return build_table(basis, weights, p, exact=spec.exact)


def run(spec: CommandSpec, show_progress: bool = False) -> Tuple[object, List[str], List[list], bool]:
    """
    Execute one command. Returns the JSON body, the CSV columns and rows, and
    whether the command succeeded (only validate can fail).
    """
    runner = MonteCarloRunner(spec.workers, show_progress)
    icomp = spec.resolved_components()

    if spec.command == 'coeffs':
        table = _table(spec)
        body = table.to_dict()
        rows = [[*entry['j'], entry['value'], entry.get('rational', '')] for entry in body['entries']]
        columns = [f"j{l}" for l in range(1, table.k + 1)] + ['value', 'rational']
        return body, columns, rows, True

    if spec.command == 'residual':
        table = _table(spec)
        value = residual(table)
        body = {'k': table.k, 'p': table.p, 'residual': value,
                'scaled_residual': math.factorial(table.k) * value, 'mse_bound': mse_upper_bound(table)}
        return body, list(body), [list(body.values())], True

    if spec.command == 'sample':
        table = _table(spec)
        m = max(1, max(icomp))
        zeta = draw_zeta_batch(SeedSpec(spec.seed), table.basis, m, table.p, spec.draws)
        values = np.atleast_1d(evaluate_expansion(table, icomp, zeta))
        body = {'k': table.k, 'p': table.p, 'components': list(icomp), 'values': values.tolist()}
        return body, ['draw', 'value'], [[n, float(v)] for n, v in enumerate(values)], True

    if spec.command == 'mse':
        table = _table(spec)
        body = error_report(table, icomp).to_dict()
        columns = ['k', 'p', 'residual', 'mse_bound', 'exact_mse']
        return body, columns, [[body[c] if body[c] is not None else '' for c in columns]], True

    if spec.command == 'validate':
        table = _table(spec)
        report = error_report(table, icomp)
        estimate = empirical_mse(table, icomp, spec.trials, spec.N, SeedSpec(spec.seed), runner)
        allowance = DISCRETIZATION_ALLOWANCE * table.interval.length ** table.k / spec.N
        if report.exact_mse is not None:
            predicted = report.exact_mse
            passed = abs(estimate.estimate - predicted) <= 3.0 * estimate.stderr + allowance
        else:
            predicted = report.mse_bound
            passed = estimate.estimate <= predicted + 3.0 * estimate.stderr + allowance
        body = {'report': report.to_dict(), 'monte_carlo': estimate.to_dict(), 'predicted': predicted,
                'comparison': 'exact' if report.exact_mse is not None else 'bound',
                'allowance': allowance, 'passed': passed}
        columns = ['predicted', 'estimate', 'stderr', 'allowance', 'passed']
        row = [predicted, estimate.estimate, estimate.stderr, allowance, passed]
        return body, columns, [row], passed

    if spec.command == 'rate':
        basis = make_basis(spec.basis, spec.interval())
        probe = convergence_rate_probe(spec.k, basis, spec.resolved_weights(), spec.p_values)
        body = probe.to_dict()
        return body, ['p', 'residual'], [list(row) for row in zip(probe.p_values, probe.residuals)], True

    schemes = run_strong_convergence(SeedSpec(spec.seed), spec.steps, spec.q, spec.trials, spec.N,
                                     spec.T - spec.t, spec.basis, runner)
    return (schemes.to_dict(), ['delta', 'q', 'mean_error', 'stderr'],
            [list(row) for row in schemes.to_rows()], True)


def _configure_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        spec, args = parse_command(argv)
    except UsageError as e:
        print(f"ito-fourier: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ContractError, UnsupportedError) as e:
        print(f"ito-fourier: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    _configure_logging(args.verbose, args.debug)
    header = spec.to_header()
    header['version'] = __version__
    header['generated_at'] = datetime.now(timezone.utc).isoformat()

    try:
        body, columns, rows, passed = run(spec, show_progress=args.verbose)
    except CapacityError as e:
        print(f"ito-fourier: capacity exceeded: {e} (achieved {e.achieved:.6g} at p={e.p})", file=sys.stderr)
        return EXIT_FAILURE
    except (DomainError, ContractError, UnsupportedError) as e:
        print(f"ito-fourier: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ExpansionError as e:
        print(f"ito-fourier: {e}", file=sys.stderr)
        return EXIT_FAILURE

    if spec.format == 'csv':
        text = dumps_csv(header, columns, rows)
    else:
        text = dumps_json(header, body)
    write_text(text, spec.output)

    if not passed:
        print("ito-fourier: validation failed", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

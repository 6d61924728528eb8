__version__ = "0.2.0"

from .bases import LegendreBasis, OrthonormalBasis, TrigonometricBasis, make_basis
from .coefficients import CoefficientTable, build_table, coefficient, parseval_norm, residual
from .error_analysis import error_report, exact_mse_theorem5, mse_upper_bound, select_truncation
from .exceptions import CapacityError, ContractError, DomainError, ExpansionError, UnsupportedError, ValidityWarning
from .expansion import closed_form_low_order, enumerate_pair_partitions, evaluate_expansion
from .models import IntegrationInterval, SeedSpec, WeightFunction, ZetaMatrix
from .oracle import empirical_mse, simulate_path
from .runner import MonteCarloRunner
from .sampling import draw_zeta

__all__ = [
    'LegendreBasis', 'OrthonormalBasis', 'TrigonometricBasis', 'make_basis',
    'CoefficientTable', 'build_table', 'coefficient', 'parseval_norm', 'residual',
    'error_report', 'exact_mse_theorem5', 'mse_upper_bound', 'select_truncation',
    'CapacityError', 'ContractError', 'DomainError', 'ExpansionError', 'UnsupportedError', 'ValidityWarning',
    'closed_form_low_order', 'enumerate_pair_partitions', 'evaluate_expansion',
    'IntegrationInterval', 'SeedSpec', 'WeightFunction', 'ZetaMatrix',
    'empirical_mse', 'simulate_path',
    'MonteCarloRunner',
    'draw_zeta',
]

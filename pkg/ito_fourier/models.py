from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
from fractions import Fraction
import math

import numpy as np
from numpy.polynomial import legendre as leg
from numpy.polynomial import polynomial as poly

from .exceptions import DomainError

MAX_WEIGHT_DEGREE = 16
SEED_LIMIT = 2 ** 64


@dataclass(frozen=True)
class IntegrationInterval:
    """The interval [t, T] the iterated integral is taken over."""
    t: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.T)):
            raise DomainError(f"interval endpoints must be finite, got [{self.t}, {self.T}]")
        if not self.t < self.T:
            raise DomainError(f"interval requires t < T, got [{self.t}, {self.T}]")

    @property
    def length(self) -> float:
        return self.T - self.t

    def to_dict(self) -> Dict:
        return {'t': self.t, 'T': self.T}


@dataclass(frozen=True)
class WeightFunction:
    """
    Nonrandom weight psi(tau) attached to one level of the iterated integral.

    Polynomials are stored as monomial coefficients over tau (lowest degree
    first). A general callable can be supplied instead; it is only ever
    integrated by adaptive quadrature.
    """
    coefficients: Tuple[float, ...] = (1.0,)
    function: Optional[Callable] = field(default=None, compare=False)
    name: Optional[str] = None

    def __post_init__(self):
        if self.function is None:
            coefficients = tuple(float(c) for c in self.coefficients)
            if not coefficients:
                raise DomainError("a polynomial weight needs at least one coefficient")
            while len(coefficients) > 1 and coefficients[-1] == 0.0:
                coefficients = coefficients[:-1]
            if len(coefficients) - 1 > MAX_WEIGHT_DEGREE:
                raise DomainError(
                    f"polynomial weight degree {len(coefficients) - 1} exceeds {MAX_WEIGHT_DEGREE}")
            object.__setattr__(self, 'coefficients', coefficients)

    @classmethod
    def one(cls) -> "WeightFunction":
        return cls((1.0,))

    @classmethod
    def polynomial(cls, coefficients) -> "WeightFunction":
        return cls(tuple(coefficients))

    @classmethod
    def from_callable(cls, function: Callable, name: Optional[str] = None) -> "WeightFunction":
        return cls((), function=function, name=name or getattr(function, '__name__', 'callable'))

    @property
    def is_polynomial(self) -> bool:
        return self.function is None

    @property
    def is_constant_one(self) -> bool:
        return self.is_polynomial and self.coefficients == (1.0,)

    @property
    def representation(self) -> str:
        if self.is_constant_one:
            return 'constant_one'
        return 'polynomial' if self.is_polynomial else 'callable'

    @property
    def degree(self) -> Optional[int]:
        return len(self.coefficients) - 1 if self.is_polynomial else None

    def __call__(self, tau):
        if self.function is not None:
            return np.vectorize(self.function, otypes=[float])(tau)
        return poly.polyval(np.asarray(tau, dtype=float), self.coefficients)

    def legendre_series(self, interval: IntegrationInterval) -> np.ndarray:
        """Legendre coefficients of psi written in z = (2 tau - t - T)/(T - t)."""
        if not self.is_polynomial:
            raise DomainError("only polynomial weights have a Legendre series")
        half = interval.length / 2.0
        substitution = np.polynomial.Polynomial([interval.t + half, half])
        in_z = np.polynomial.Polynomial(self.coefficients)(substitution)
        return leg.poly2leg(in_z.coef)

    def to_dict(self) -> Dict:
        if not self.is_polynomial:
            return {'representation': 'callable', 'name': self.name}
        return {'representation': self.representation, 'coefficients': list(self.coefficients)}

    @classmethod
    def from_dict(cls, data: Dict) -> "WeightFunction":
        if data.get('representation') == 'callable':
            raise DomainError(f"callable weight '{data.get('name')}' cannot be restored from JSON")
        return cls(tuple(data.get('coefficients', (1.0,))))


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus stream id; together they fix every random draw."""
    seed: int
    stream: int = 0

    def __post_init__(self):
        for label, value in (('seed', self.seed), ('stream', self.stream)):
            if not 0 <= int(value) < SEED_LIMIT:
                raise DomainError(f"{label} must be a 64-bit unsigned integer, got {value}")

    def child(self, stream: int) -> "SeedSpec":
        return SeedSpec(self.seed, stream)

    def to_dict(self) -> Dict:
        return {'seed': self.seed, 'stream': self.stream}


@dataclass(frozen=True)
class RationalCoefficient:
    """
    Exact form of a Legendre coefficient:
    C = bar * sqrt(radicand) / 2**k * (T - t)**scale_exp
    where bar is the simplex integral of the Legendre product over [-1, 1].
    """
    bar: Fraction
    radicand: int
    k: int
    scale_exp: Fraction

    def to_float(self, interval: IntegrationInterval) -> float:
        prefactor = math.sqrt(self.radicand) / 2 ** self.k
        return float(self.bar) * prefactor * interval.length ** float(self.scale_exp)

    def to_dict(self) -> Dict:
        return {
            'rational': f"{self.bar.numerator}/{self.bar.denominator}",
            'radicand': self.radicand,
            'scale_exp': f"{self.scale_exp.numerator}/{self.scale_exp.denominator}",
        }


@dataclass
class ZetaMatrix:
    """
    zeta_j^(i) for i = 0..m and j = 0..p, optionally with leading batch axes.
    Row 0 is the deterministic time row.
    """
    values: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[-2] - 1

    @property
    def p(self) -> int:
        return self.values.shape[-1] - 1

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.values.shape[:-2]

    def row(self, i: int) -> np.ndarray:
        return self.values[..., i, :]


@dataclass
class WienerPath:
    """Brownian increments on the uniform grid tau_l = t + l*delta, shape (..., m, N)."""
    interval: IntegrationInterval
    increments: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.increments.shape[-1]

    @property
    def m(self) -> int:
        return self.increments.shape[-2]

    @property
    def delta(self) -> float:
        return self.interval.length / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        """Left points tau_0, ..., tau_{N-1}."""
        return self.interval.t + self.delta * np.arange(self.n_steps)

    def component(self, i: int) -> np.ndarray:
        """Increments of w^(i); i = 0 is time itself."""
        if i == 0:
            return np.broadcast_to(np.full(self.n_steps, self.delta),
                                   self.increments.shape[:-2] + (self.n_steps,))
        if not 1 <= i <= self.m:
            raise DomainError(f"component {i} outside 0..{self.m}")
        return self.increments[..., i - 1, :]


@dataclass
class ErrorReport:
    """Error figures for one coefficient table and component tuple."""
    k: int
    p: int
    residual: float
    mse_bound: float
    exact_mse: Optional[float] = None
    moment_bounds: Dict[int, float] = field(default_factory=dict)
    selected_p: Optional[int] = None
    components: Optional[Tuple[int, ...]] = None

    def to_dict(self) -> Dict:
        return {
            'k': self.k,
            'p': self.p,
            'components': list(self.components) if self.components else None,
            'residual': self.residual,
            'mse_bound': self.mse_bound,
            'exact_mse': self.exact_mse,
            'moment_bounds': {str(n): value for n, value in sorted(self.moment_bounds.items())},
            'selected_p': self.selected_p,
        }


@dataclass
class MonteCarloEstimate:
    """Sample mean-square error of the expansion against the path oracle."""
    estimate: float
    stderr: float
    fourth_moment: float
    fourth_stderr: float
    trials: int
    n_steps: int

    def to_dict(self) -> Dict:
        return {
            'estimate': self.estimate,
            'stderr': self.stderr,
            'fourth_moment': self.fourth_moment,
            'fourth_stderr': self.fourth_stderr,
            'trials': self.trials,
            'n_steps': self.n_steps,
        }


@dataclass
class RateProbe:
    """Empirical decay of the Parseval residual in p."""
    p_values: List[int]
    residuals: List[float]
    slope: Optional[float]
    g_constant: float
    exact: bool = False

    def to_dict(self) -> Dict:
        return {
            'p_values': list(self.p_values),
            'residuals': list(self.residuals),
            'slope': self.slope,
            'g_constant': self.g_constant,
            'exact': self.exact,
        }


@dataclass
class SchemeRun:
    """Strong errors of the Milstein demo over a ladder of step sizes."""
    step_sizes: List[float]
    truncations: List[int]
    trials: int
    errors: List[float]
    stderrs: List[float]
    order: Optional[float] = None

    def to_rows(self) -> List[Tuple[float, int, float, float]]:
        return list(zip(self.step_sizes, self.truncations, self.errors, self.stderrs))

    def to_dict(self) -> Dict:
        return {
            'step_sizes': list(self.step_sizes),
            'truncations': list(self.truncations),
            'trials': self.trials,
            'errors': list(self.errors),
            'stderrs': list(self.stderrs),
            'order': self.order,
        }

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from numpy.polynomial import legendre as leg
from numpy.polynomial import Polynomial

from .bases import OrthonormalBasis, make_basis
from .bases.utils import QUAD_TOLERANCE, gauss_legendre_nodes, spectral_integration_matrix
from .exact import EXACT_K_MAX, exact_table_rationals
from .exceptions import ContractError, DomainError, UnsupportedError
from .models import IntegrationInterval, RationalCoefficient, WeightFunction

logger = logging.getLogger(__name__)

RESIDUAL_FLOOR = 1e-12
NEGATIVE_RESIDUAL_ALARM = 1e-10
MAX_NODES = 2048

# dense (p + 1)**k storage caps
DENSE_P_CAP = {1: 256, 2: 256, 3: 64, 4: 16, 5: 16}
DENSE_P_CAP_DEFAULT = 6


def dense_cap(k: int) -> int:
    return DENSE_P_CAP.get(k, DENSE_P_CAP_DEFAULT)


def as_weights(weights, k: Optional[int] = None) -> Tuple[WeightFunction, ...]:
    if isinstance(weights, WeightFunction):
        if k is None:
            raise DomainError("a single weight needs the multiplicity k")
        return (weights,) * k
    weights = tuple(weights)
    if k is not None and len(weights) != k:
        raise ContractError(f"expected {k} weights, got {len(weights)}")
    return weights


def _nodal_simplex(columns: Sequence[Callable[[np.ndarray], np.ndarray]],
                   interval: IntegrationInterval, n: int) -> np.ndarray:
    """
    Iterated simplex integral on n Gauss-Legendre nodes.

    columns[s](theta) returns an (n, L_s) array of level-s integrands. The
    result has shape (L_1, ..., L_k): the integral over t < t_1 < ... < t_k < T
    of the product of the chosen columns.
    """
    z, w = gauss_legendre_nodes(n)
    theta = interval.t + 0.5 * interval.length * (z + 1.0)
    jacobian = 0.5 * interval.length
    integrate = spectral_integration_matrix(n)
    inner = np.ones((n, 1))
    sizes = []
    for column in columns[:-1]:
        values = column(theta)
        sizes.append(values.shape[1])
        integrand = values[:, :, None] * inner[:, None, :]
        inner = jacobian * (integrate @ integrand.reshape(n, -1))
    last = columns[-1](theta)
    sizes.append(last.shape[1])
    flat = jacobian * ((w[:, None] * last).T @ inner)
    # rows of flat run over j_k; columns over (j_{k-1}, ..., j_1) row-major
    tensor = flat.reshape(tuple(reversed(sizes)))
    return np.transpose(tensor, tuple(reversed(range(len(sizes)))))


def _is_polynomial_legendre(basis: OrthonormalBasis, weights: Sequence[WeightFunction]) -> bool:
    return basis.kind == 'legendre' and all(weight.is_polynomial for weight in weights)


def _adaptive_simplex(columns, interval: IntegrationInterval, start: int,
                      tol: float = QUAD_TOLERANCE) -> np.ndarray:
    n = start
    previous = _nodal_simplex(columns, interval, n)
    while True:
        refined_n = max(n + 16, int(math.ceil(1.5 * n)))
        if refined_n > MAX_NODES:
            logger.warning("nodal quadrature stopped at %d nodes before reaching %g", n, tol)
            return previous
        refined = _nodal_simplex(columns, interval, refined_n)
        change = float(np.max(np.abs(refined - previous)))
        logger.debug("nodal refinement %d -> %d nodes, change %.3g", n, refined_n, change)
        if change <= tol * max(1.0, float(np.max(np.abs(refined)))):
            return refined
        n, previous = refined_n, refined


def _coefficient_columns(basis: OrthonormalBasis, weights: Sequence[WeightFunction],
                         levels: Sequence[Sequence[int]]):
    def column(weight, indices):
        indices = np.asarray(indices, dtype=int)

        def values(theta):
            phi = basis.matrix(int(indices.max()), theta)[:, indices]
            return np.asarray(weight(theta), dtype=float)[:, None] * phi
        return values
    return [column(weight, indices) for weight, indices in zip(weights, levels)]


def coefficient_block(basis: OrthonormalBasis, weights: Sequence[WeightFunction],
                      levels: Sequence[Sequence[int]]) -> np.ndarray:
    """Coefficients for the index sets levels[0] x ... x levels[k-1]."""
    columns = _coefficient_columns(basis, weights, levels)
    if _is_polynomial_legendre(basis, weights):
        degree = sum(max(indices) + weight.degree for indices, weight in zip(levels, weights))
        # every intermediate polynomial stays below the node count
        return _nodal_simplex(columns, basis.interval, degree + len(weights) + 1)
    spread = sum(max(indices) for indices in levels)
    extra = sum(8 if weight.degree is None else weight.degree for weight in weights)
    return _adaptive_simplex(columns, basis.interval, max(32, 2 * spread + extra + 32))


def coefficient(basis: OrthonormalBasis, weights: Sequence[WeightFunction], jtuple: Sequence[int]) -> float:
    """
    C_{j_k...j_1}: the integral over the simplex of
    phi_{j_k} psi_k ... phi_{j_1} psi_1, built from the inside out.
    """
    jtuple = tuple(int(j) for j in jtuple)
    weights = tuple(weights)
    if not jtuple:
        raise DomainError("multiplicity k must be at least 1")
    if len(weights) != len(jtuple):
        raise ContractError(f"{len(weights)} weights for a {len(jtuple)}-index coefficient")
    if any(j < 0 for j in jtuple):
        raise DomainError(f"indices must be non-negative, got {jtuple}")
    interval = basis.interval
    if len(jtuple) == 1:
        return basis.weighted_primitive(jtuple[0], weights[0], interval.t, interval.T)
    if _is_polynomial_legendre(basis, weights):
        # C_{j_s...j_1}(tau) as a Legendre series in z, vanishing at z = -1
        inner = np.array([1.0])
        for j, weight in zip(jtuple, weights):
            unit = np.zeros(j + 1)
            unit[j] = 1.0
            integrand = leg.legmul(leg.legmul(unit, weight.legendre_series(interval)), inner)
            scale = math.sqrt((2 * j + 1) / interval.length) * 0.5 * interval.length
            inner = scale * leg.legint(integrand, lbnd=-1)
        return float(leg.legval(1.0, inner))
    return float(coefficient_block(basis, weights, [[j] for j in jtuple]).ravel()[0])


@dataclass
class CoefficientTable:
    """Dense tensor of C_{j_k...j_1} for all j_l <= p, indexed as values[j_1, ..., j_k]."""
    basis: OrthonormalBasis
    weights: Tuple[WeightFunction, ...]
    values: np.ndarray
    rationals: Optional[Dict[Tuple[int, ...], RationalCoefficient]] = None
    _norm: Optional[float] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.weights = tuple(self.weights)
        # one memory layout, so sums round the same way after a reload
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.ndim < 1 or len(set(self.values.shape)) != 1:
            raise ContractError(f"coefficient tensor must be cubic, got shape {self.values.shape}")
        if len(self.weights) != self.values.ndim:
            raise ContractError(f"{len(self.weights)} weights for a k={self.values.ndim} tensor")

    @property
    def k(self) -> int:
        return self.values.ndim

    @property
    def p(self) -> int:
        return self.values.shape[0] - 1

    @property
    def interval(self) -> IntegrationInterval:
        return self.basis.interval

    def __getitem__(self, jtuple) -> float:
        return float(self.values[tuple(jtuple)])

    @property
    def norm(self) -> float:
        """Squared L2 norm of the kernel K."""
        if self._norm is None:
            self._norm = parseval_norm(self.weights, self.k, self.interval)
        return self._norm

    def squared_sum(self) -> float:
        return float(np.sum(self.values ** 2))

    def truncated(self, p: int) -> "CoefficientTable":
        if not 0 <= p <= self.p:
            raise DomainError(f"cannot truncate a p={self.p} table to p={p}")
        values = self.values[(slice(0, p + 1),) * self.k].copy()
        rationals = None
        if self.rationals is not None:
            rationals = {j: r for j, r in self.rationals.items() if max(j) <= p}
        return CoefficientTable(self.basis, self.weights, values, rationals, self._norm)

    def grow(self, p: int) -> "CoefficientTable":
        """
        Extend to truncation p, keeping the current block and computing only
        the shell of MultiDegrees whose largest index exceeds the old p.
        """
        if p <= self.p:
            return self.truncated(p)
        if p > dense_cap(self.k):
            raise UnsupportedError(f"dense tables for k={self.k} are capped at p={dense_cap(self.k)}, asked for {p}")
        logger.info("growing %s table k=%d p=%d -> %d", self.basis.get_basis_name(), self.k, self.p, p)
        old, new, full = range(self.p + 1), range(self.p + 1, p + 1), range(p + 1)
        values = np.zeros((p + 1,) * self.k)
        values[(slice(0, self.p + 1),) * self.k] = self.values
        for axis in range(self.k):
            # first axis holding a new index is `axis`
            levels = [old] * axis + [new] + [full] * (self.k - axis - 1)
            region = (slice(0, self.p + 1),) * axis + (slice(self.p + 1, p + 1),) + (slice(None),) * (self.k - axis - 1)
            values[region] = coefficient_block(self.basis, self.weights, levels)
        rationals = None
        if self.rationals is not None:
            rationals = exact_table_rationals(self.basis, self.weights, p)
        return CoefficientTable(self.basis, self.weights, values, rationals, self._norm)

    def cumulative_squares(self) -> np.ndarray:
        """Entry q is the sum of C^2 over all MultiDegrees with max index <= q."""
        grids = np.indices(self.values.shape)
        shells = np.max(grids, axis=0).ravel()
        totals = np.bincount(shells, weights=(self.values ** 2).ravel(), minlength=self.p + 1)
        return np.cumsum(totals)

    def to_dict(self) -> Dict:
        entries = []
        for jtuple in np.ndindex(*self.values.shape):
            entry = {'j': list(jtuple), 'value': float(self.values[jtuple])}
            if self.rationals is not None and jtuple in self.rationals:
                exact = self.rationals[jtuple].to_dict()
                entry['rational'] = exact['rational']
                entry['scale_exp'] = exact['scale_exp']
            entries.append(entry)
        return {
            'basis': self.basis.kind,
            'interval': self.interval.to_dict(),
            'k': self.k,
            'p': self.p,
            'weights': [weight.to_dict() for weight in self.weights],
            'entries': entries,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CoefficientTable":
        interval = IntegrationInterval(float(data['interval']['t']), float(data['interval']['T']))
        basis = make_basis(data['basis'], interval)
        weights = tuple(WeightFunction.from_dict(w) for w in data['weights'])
        k, p = int(data['k']), int(data['p'])
        values = np.zeros((p + 1,) * k)
        seen = np.zeros(values.shape, dtype=bool)
        rationals = {}
        for entry in data['entries']:
            jtuple = tuple(int(j) for j in entry['j'])
            values[jtuple] = float(entry['value'])
            seen[jtuple] = True
            if 'rational' in entry:
                rationals[jtuple] = RationalCoefficient(
                    bar=Fraction(entry['rational']),
                    radicand=math.prod(2 * j + 1 for j in jtuple),
                    k=k,
                    scale_exp=Fraction(entry.get('scale_exp', f"{k}/2")),
                )
        if not seen.all():
            raise ContractError("coefficient table document is missing entries")
        return cls(basis, weights, values, rationals or None)


def build_table(basis: OrthonormalBasis, weights, p: int, k: Optional[int] = None,
                exact: bool = False) -> CoefficientTable:
    """Populate every C_{j_k...j_1} with j_l <= p."""
    weights = as_weights(weights, k)
    k = len(weights)
    if k < 1:
        raise DomainError("multiplicity k must be at least 1")
    if p < 0:
        raise DomainError(f"truncation p must be non-negative, got {p}")
    if p > dense_cap(k):
        raise UnsupportedError(f"dense tables for k={k} are capped at p={dense_cap(k)}, asked for {p}")
    logger.info("building %s table k=%d p=%d", basis.get_basis_name(), k, p)
    values = coefficient_block(basis, weights, [range(p + 1)] * k)
    rationals = None
    if exact:
        if k > EXACT_K_MAX or not _is_polynomial_legendre(basis, weights):
            raise UnsupportedError("exact rationals need the Legendre system, polynomial weights and k <= 3")
        rationals = exact_table_rationals(basis, weights, p)
    return CoefficientTable(basis, weights, values, rationals)


def taylor_ito_table(k: int, basis: OrthonormalBasis, p: int) -> CoefficientTable:
    """Table for psi_1 = ... = psi_k = 1, the kernel of every Taylor-Ito integral."""
    return build_table(basis, WeightFunction.one(), p, k=k)


def parseval_norm(weights, k: int, interval: IntegrationInterval) -> float:
    """Integral of K^2 over [t, T]^k, i.e. of prod psi_l(t_l)^2 over the simplex."""
    weights = as_weights(weights, k)
    if k < 1:
        raise DomainError("multiplicity k must be at least 1")
    if all(weight.is_constant_one for weight in weights):
        return interval.length ** k / math.factorial(k)
    if all(weight.is_polynomial for weight in weights):
        inner = Polynomial([1.0])
        for weight in weights:
            square = Polynomial(weight.coefficients) ** 2
            inner = (square * inner).integ(lbnd=interval.t)
        return float(inner(interval.T))
    columns = [(lambda w: (lambda theta: (np.asarray(w(theta), dtype=float) ** 2)[:, None]))(weight)
               for weight in weights]
    return float(_adaptive_simplex(columns, interval, 64).ravel()[0])


def residual(table: CoefficientTable) -> float:
    """Parseval residual ||K||^2 - sum of C^2 over the table, floored at zero."""
    return floor_residual(table.norm - table.squared_sum(), table.norm)


def residual_series(table: CoefficientTable) -> List[float]:
    """Residuals of the nested truncations p' = 0..p of one table."""
    return [floor_residual(table.norm - total, table.norm) for total in table.cumulative_squares()]


def floor_residual(value: float, norm: float) -> float:
    scale = max(1.0, abs(norm))
    if value < -NEGATIVE_RESIDUAL_ALARM * scale:
        logger.warning("Parseval residual %.3g is negative beyond rounding", value)
    if value < RESIDUAL_FLOOR * scale:
        return 0.0
    return float(value)

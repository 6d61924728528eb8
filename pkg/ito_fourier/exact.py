"""
Exact rational Legendre coefficients.

The simplex integral
    bar C = int_{-1}^{1} P_{j_k}(z) ... int_{-1}^{y} P_{j_1}(x) dx ... dz
(with polynomial weights folded in) is computed over QQ, and the coefficient
on [t, T] is bar C * sqrt(prod(2 j_s + 1)) / 2**k * (T - t)**(k/2).
"""
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple
import logging
import math

import sympy

from .exceptions import DomainError, UnsupportedError
from .models import IntegrationInterval, RationalCoefficient, WeightFunction

logger = logging.getLogger(__name__)

EXACT_K_MAX = 3
EXACT_P_MAX = 16

_Z = sympy.Symbol('z')


@lru_cache(maxsize=None)
def _legendre(j: int) -> sympy.Poly:
    return sympy.Poly(sympy.legendre_poly(j, _Z), _Z, domain=sympy.QQ)


def _to_fraction(value) -> Fraction:
    rational = sympy.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


def _qq(value) -> sympy.Rational:
    fraction = Fraction(value)
    return sympy.Rational(fraction.numerator, fraction.denominator)


def _weight_in_z(weight: WeightFunction, interval: Optional[IntegrationInterval]) -> sympy.Poly:
    if weight.is_constant_one:
        return sympy.Poly(1, _Z, domain=sympy.QQ)
    if interval is None:
        raise DomainError("a non-constant weight needs the interval to be exact")
    t = _qq(interval.t)
    half = _qq(Fraction(interval.T) - Fraction(interval.t)) / 2
    tau = sympy.Poly(t + half * (_Z + 1), _Z, domain=sympy.QQ)
    result = sympy.Poly(0, _Z, domain=sympy.QQ)
    for power, coefficient in enumerate(weight.coefficients):
        result += tau ** power * _qq(coefficient)
    return result


def _integrate_from_minus_one(integrand: sympy.Poly) -> sympy.Poly:
    antiderivative = integrand.integrate()
    return antiderivative - antiderivative.eval(-1)


def _check_request(k: int, weights: Sequence[WeightFunction], basis) -> None:
    if k < 1:
        raise DomainError("multiplicity k must be at least 1")
    if k > EXACT_K_MAX:
        raise UnsupportedError(f"exact rational coefficients are limited to k <= {EXACT_K_MAX}")
    if len(weights) != k:
        raise DomainError(f"expected {k} weights, got {len(weights)}")
    if not all(weight.is_polynomial for weight in weights):
        raise UnsupportedError("exact rational coefficients need polynomial weights")
    if basis is not None and basis.kind != 'legendre':
        raise UnsupportedError("exact rational coefficients exist for the Legendre system only")


def _rational(bar: sympy.Rational, jtuple: Sequence[int]) -> RationalCoefficient:
    return RationalCoefficient(
        bar=_to_fraction(bar),
        radicand=math.prod(2 * j + 1 for j in jtuple),
        k=len(jtuple),
        scale_exp=Fraction(len(jtuple), 2),
    )


def exact_coefficient_rational(jtuple: Sequence[int], weights: Sequence[WeightFunction],
                               basis=None) -> RationalCoefficient:
    """Exact C_{j_k...j_1} for the Legendre system and polynomial weights, k <= 3."""
    jtuple = tuple(int(j) for j in jtuple)
    _check_request(len(jtuple), weights, basis)
    if any(j < 0 for j in jtuple):
        raise DomainError(f"indices must be non-negative, got {jtuple}")
    interval = basis.interval if basis is not None else None
    inner = sympy.Poly(1, _Z, domain=sympy.QQ)
    for j, weight in zip(jtuple, weights):
        inner = _integrate_from_minus_one(_legendre(j) * _weight_in_z(weight, interval) * inner)
    return _rational(inner.eval(1), jtuple)


def exact_table_rationals(basis, weights: Sequence[WeightFunction],
                          p: int) -> Dict[Tuple[int, ...], RationalCoefficient]:
    """Exact coefficients for every MultiDegree up to p, sharing inner integrals."""
    k = len(weights)
    _check_request(k, weights, basis)
    if p > EXACT_P_MAX:
        raise UnsupportedError(f"exact rational tables are limited to p <= {EXACT_P_MAX}")
    logger.info("building exact rational table k=%d p=%d", k, p)
    weights_z = [_weight_in_z(weight, basis.interval) for weight in weights]
    level = {(): sympy.Poly(1, _Z, domain=sympy.QQ)}
    for s in range(k):
        level = {
            prefix + (j,): _integrate_from_minus_one(_legendre(j) * weights_z[s] * inner)
            for prefix, inner in level.items()
            for j in range(p + 1)
        }
    return {jtuple: _rational(inner.eval(1), jtuple)
            for jtuple, inner in sorted(level.items())}

from .base import OrthonormalBasis
from .legendre import LegendreBasis, legendre_eval, legendre_derivative, legendre_table
from .trigonometric import TrigonometricBasis
from ..exceptions import DomainError
from ..models import IntegrationInterval

BASES = {
    LegendreBasis.kind: LegendreBasis,
    TrigonometricBasis.kind: TrigonometricBasis,
}


def make_basis(kind: str, interval: IntegrationInterval) -> OrthonormalBasis:
    """Build the orthonormal system named by kind on the given interval."""
    try:
        return BASES[kind](interval)
    except KeyError:
        raise DomainError(f"unknown basis '{kind}', expected one of {sorted(BASES)}") from None


def basis_eval(basis: OrthonormalBasis, j: int, theta):
    return basis.evaluate(j, theta)


def weighted_primitive(basis: OrthonormalBasis, j: int, weight, v: float, x: float) -> float:
    return basis.weighted_primitive(j, weight, v, x)


__all__ = [
    'OrthonormalBasis',
    'LegendreBasis',
    'TrigonometricBasis',
    'BASES',
    'make_basis',
    'basis_eval',
    'weighted_primitive',
    'legendre_eval',
    'legendre_derivative',
    'legendre_table',
]

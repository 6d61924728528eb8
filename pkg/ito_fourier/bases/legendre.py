import math

import numpy as np
from numpy.polynomial import legendre as leg

from ..exceptions import DomainError
from ..models import WeightFunction
from .base import OrthonormalBasis


def _bonnet(j: int, x: np.ndarray) -> np.ndarray:
    p_prev = np.ones_like(x)
    if j == 0:
        return p_prev
    p_curr = x.copy()
    for n in range(2, j + 1):
        p_prev, p_curr = p_curr, ((2 * n - 1) * x * p_curr - (n - 1) * p_prev) / n
    return p_curr


def legendre_eval(j: int, x):
    """Legendre polynomial P_j(x) on [-1, 1] by upward three-term recurrence."""
    if int(j) != j or j < 0:
        raise DomainError(f"Legendre degree must be a non-negative integer, got {j}")
    values = np.asarray(x, dtype=float)
    if np.any(np.abs(values) > 1.0):
        raise DomainError("Legendre argument outside [-1, 1]")
    result = _bonnet(int(j), values)
    return float(result) if result.ndim == 0 else result


def legendre_table(p: int, x) -> np.ndarray:
    """P_0..P_p at the points x, shape (len(x), p + 1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty(x.shape + (p + 1,))
    table[..., 0] = 1.0
    if p >= 1:
        table[..., 1] = x
    for n in range(2, p + 1):
        table[..., n] = ((2 * n - 1) * x * table[..., n - 1] - (n - 1) * table[..., n - 2]) / n
    return table


def legendre_derivative(j: int, x):
    """P'_j(x) from j (x P_j - P_{j-1}) / (x^2 - 1), with the endpoint limits."""
    if int(j) != j or j < 0:
        raise DomainError(f"Legendre degree must be a non-negative integer, got {j}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("Legendre argument outside [-1, 1]")
    if j == 0:
        result = np.zeros_like(x)
    else:
        edge = np.abs(x) == 1.0
        interior = np.where(edge, 0.0, x)
        result = j * (interior * _bonnet(j, interior) - _bonnet(j - 1, interior)) / (interior ** 2 - 1.0)
        result = np.where(edge, 0.5 * j * (j + 1) * np.sign(x) ** (j + 1), result)
    return float(result) if result.ndim == 0 else result


class LegendreBasis(OrthonormalBasis):
    """phi_j(theta) = sqrt((2j + 1)/(T - t)) P_j(z(theta))."""

    kind = 'legendre'

    def get_basis_name(self) -> str:
        return "Legendre"

    def values(self, j: int, theta) -> np.ndarray:
        z = np.clip(self.to_z(theta), -1.0, 1.0)
        return math.sqrt((2 * j + 1) / self.interval.length) * _bonnet(j, z)

    def matrix(self, p: int, theta) -> np.ndarray:
        z = np.clip(self.to_z(np.atleast_1d(theta)), -1.0, 1.0)
        scale = np.sqrt((2 * np.arange(p + 1) + 1) / self.interval.length)
        return legendre_table(p, z) * scale

    def _closed_form_primitive(self, j: int, weight: WeightFunction, v: float, x: float) -> float:
        # integrate P_j * psi in the Legendre basis; legint applies
        # (2n + 1) P_n = P'_{n+1} - P'_{n-1} term by term
        unit = np.zeros(j + 1)
        unit[j] = 1.0
        antiderivative = leg.legint(leg.legmul(unit, weight.legendre_series(self.interval)))
        z_v, z_x = np.clip(self.to_z([v, x]), -1.0, 1.0)
        jacobian = 0.5 * self.interval.length
        scale = math.sqrt((2 * j + 1) / self.interval.length)
        return scale * jacobian * (leg.legval(z_x, antiderivative) - leg.legval(z_v, antiderivative))

from abc import ABC, abstractmethod
import logging
from typing import Sequence

import numpy as np

from ..exceptions import DomainError
from ..models import IntegrationInterval, WeightFunction
from .utils import integrate_callable

logger = logging.getLogger(__name__)

# relative slack when checking that a point lies in [t, T]
DOMAIN_SLACK = 1e-12


class OrthonormalBasis(ABC):
    """Abstract complete orthonormal system {phi_j} in L2([t, T])."""

    kind = ''

    def __init__(self, interval: IntegrationInterval):
        self.interval = interval

    @abstractmethod
    def get_basis_name(self) -> str:
        """Get the display name of the system."""
        pass

    @abstractmethod
    def values(self, j: int, theta) -> np.ndarray:
        """phi_j at the points theta, without domain checks."""
        pass

    @abstractmethod
    def _closed_form_primitive(self, j: int, weight: WeightFunction, v: float, x: float) -> float:
        """Integral of phi_j * psi over [v, x] for polynomial psi."""
        pass

    def __eq__(self, other):
        return (isinstance(other, OrthonormalBasis) and self.kind == other.kind
                and self.interval == other.interval)

    def __hash__(self):
        return hash((self.kind, self.interval))

    def __repr__(self):
        return f"{type(self).__name__}([{self.interval.t}, {self.interval.T}])"

    def to_z(self, theta):
        """Affine map of [t, T] onto [-1, 1]."""
        return (2.0 * np.asarray(theta, dtype=float) - self.interval.t - self.interval.T) / self.interval.length

    def from_z(self, z):
        return self.interval.t + 0.5 * self.interval.length * (np.asarray(z, dtype=float) + 1.0)

    def _check_point(self, theta) -> None:
        slack = DOMAIN_SLACK * max(1.0, abs(self.interval.t), abs(self.interval.T))
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < self.interval.t - slack) or np.any(theta > self.interval.T + slack):
            raise DomainError(
                f"point(s) outside [{self.interval.t}, {self.interval.T}] for {self.get_basis_name()}")

    @staticmethod
    def _check_index(j: int) -> None:
        if int(j) != j or j < 0:
            raise DomainError(f"basis index must be a non-negative integer, got {j}")

    def evaluate(self, j: int, theta):
        """phi_j(theta); theta may be a scalar or an array inside [t, T]."""
        self._check_index(j)
        self._check_point(theta)
        result = self.values(int(j), theta)
        return float(result) if np.ndim(result) == 0 else result

    def matrix(self, p: int, theta) -> np.ndarray:
        """Array of shape (len(theta), p + 1) with phi_j(theta_i) in column j."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return np.stack([self.values(j, theta) for j in range(p + 1)], axis=-1)

    def weighted_primitive(self, j: int, weight: WeightFunction, v: float, x: float) -> float:
        """
        Integral of phi_j(theta) * psi(theta) over [v, x].

        Polynomial weights take the closed-form path of the concrete system;
        callables go through adaptive quadrature.
        """
        self._check_index(j)
        if v > x:
            raise DomainError(f"primitive needs v <= x, got v={v}, x={x}")
        self._check_point([v, x])
        if v == x:
            return 0.0
        if weight.is_polynomial:
            return float(self._closed_form_primitive(int(j), weight, v, x))
        logger.debug("quadrature primitive for j=%d on [%g, %g]", j, v, x)
        return integrate_callable(lambda theta: self.values(int(j), theta) * weight(theta), v, x)

    def time_row(self, p: int) -> np.ndarray:
        """Integrals of phi_0..phi_p over the whole interval."""
        one = WeightFunction.one()
        return np.array([self.weighted_primitive(j, one, self.interval.t, self.interval.T)
                         for j in range(p + 1)])

    def gram_matrix(self, indices: Sequence[int], nodes: int = 256) -> np.ndarray:
        """Gauss-Legendre approximation of the Gram integrals over [t, T]."""
        z, w = np.polynomial.legendre.leggauss(nodes)
        theta = self.from_z(z)
        phi = np.stack([self.values(j, theta) for j in indices], axis=-1)
        return 0.5 * self.interval.length * (phi * w[:, None]).T @ phi

    def to_dict(self):
        return {'kind': self.kind, 'interval': self.interval.to_dict()}

import math

import numpy as np
from numpy.polynomial import polynomial as poly

from ..models import WeightFunction
from .base import OrthonormalBasis


class TrigonometricBasis(OrthonormalBasis):
    """
    1/sqrt(T - t) times 1 (j = 0), sqrt(2) sin(2 pi r (theta - t)/(T - t)) (j = 2r - 1)
    or sqrt(2) cos(2 pi r (theta - t)/(T - t)) (j = 2r).
    """

    kind = 'trigonometric'

    def get_basis_name(self) -> str:
        return "Trigonometric"

    def frequency(self, j: int) -> float:
        return 2.0 * math.pi * ((j + 1) // 2) / self.interval.length

    def values(self, j: int, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if j == 0:
            return np.full_like(theta, 1.0 / math.sqrt(self.interval.length))
        phase = self.frequency(j) * (theta - self.interval.t)
        wave = np.sin(phase) if j % 2 == 1 else np.cos(phase)
        return math.sqrt(2.0 / self.interval.length) * wave

    def _closed_form_primitive(self, j: int, weight: WeightFunction, v: float, x: float) -> float:
        coefficients = np.asarray(weight.coefficients, dtype=float)
        if j == 0:
            antiderivative = poly.polyint(coefficients)
            return (poly.polyval(x, antiderivative) - poly.polyval(v, antiderivative)) / math.sqrt(
                self.interval.length)
        # repeated integration by parts terminates after deg(psi) + 1 terms:
        # int e^{i w u} psi = e^{i w u} sum_n (-1)^n psi^(n) / (i w)^(n+1)
        omega = self.frequency(j)
        derivatives = [coefficients]
        while len(derivatives[-1]) > 1:
            derivatives.append(poly.polyder(derivatives[-1]))

        def antiderivative(theta: float) -> complex:
            total = 0j
            for n, derivative in enumerate(derivatives):
                total += (-1) ** n * poly.polyval(theta, derivative) / (1j * omega) ** (n + 1)
            return np.exp(1j * omega * (theta - self.interval.t)) * total

        difference = antiderivative(x) - antiderivative(v)
        part = difference.imag if j % 2 == 1 else difference.real
        return math.sqrt(2.0 / self.interval.length) * part

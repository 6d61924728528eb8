from functools import lru_cache
from typing import Callable, Tuple
import logging
import warnings

import numpy as np
from numpy.polynomial import legendre as leg
from scipy import integrate

logger = logging.getLogger(__name__)

QUAD_TOLERANCE = 1e-12


def integrate_callable(function: Callable, v: float, x: float, tol: float = QUAD_TOLERANCE) -> float:
    """Adaptive Gauss-Kronrod quadrature of a scalar function over [v, x]."""
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            value, error = integrate.quad(function, v, x, epsabs=tol, epsrel=tol, limit=500)
        except integrate.IntegrationWarning as exc:
            # accept the result but let the caller see it in the log
            warnings.simplefilter('ignore', integrate.IntegrationWarning)
            value, error = integrate.quad(function, v, x, epsabs=tol, epsrel=tol, limit=500)
            logger.warning("quadrature on [%g, %g] did not reach %g: %s (error estimate %g)",
                           v, x, tol, exc, error)
    return float(value)


@lru_cache(maxsize=64)
def gauss_legendre_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = leg.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=64)
def spectral_integration_matrix(n: int) -> np.ndarray:
    """
    Nodal antiderivative on the n Gauss-Legendre nodes.

    For a polynomial f of degree <= n - 2 sampled at the nodes, S @ f gives
    the integral of f from -1 to each node exactly (up to rounding). The
    coefficient-space step is numpy's legint, i.e. the identity
    (2j + 1) P_j = P'_{j+1} - P'_{j-1}.
    """
    nodes, weights = gauss_legendre_nodes(n)
    vander = leg.legvander(nodes, n - 1)
    # discrete Legendre transform is exact for degree <= n - 1
    modes = np.arange(n)
    inverse = (vander * weights[:, None]).T * ((2 * modes + 1) / 2.0)[:, None]
    integral = np.zeros((n, n))
    for mode in range(n):
        unit = np.zeros(mode + 1)
        unit[mode] = 1.0
        antiderivative = leg.legint(unit, lbnd=-1)
        integral[:, mode] = antiderivative[:n] if len(antiderivative) > n else np.pad(
            antiderivative, (0, n - len(antiderivative)))
    matrix = vander @ integral @ inverse
    matrix.setflags(write=False)
    return matrix

"""
Reproducible draws of the Gaussian variables zeta_j^(i).

Every component i owns a Philox stream keyed by (seed, stream, i), so the
row of component i never depends on how many other components are drawn.
"""
from typing import Union
import logging

import numpy as np

from .bases import OrthonormalBasis
from .exceptions import DomainError
from .models import SeedSpec, ZetaMatrix

logger = logging.getLogger(__name__)

SeedLike = Union[SeedSpec, int]


def _as_seed(seed: SeedLike) -> SeedSpec:
    return seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))


def seed_sequence(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    """SeedSequence for the sub-stream (stream, *key) of the master seed."""
    seed = _as_seed(seed)
    return np.random.SeedSequence(seed.seed, spawn_key=(seed.stream,) + tuple(int(k) for k in key))


def generator(seed: SeedLike, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))


def zeta_time_row(basis: OrthonormalBasis, p: int) -> np.ndarray:
    """zeta_j^(0) = integral of phi_j over [t, T], j = 0..p."""
    if p < 0:
        raise DomainError(f"truncation p must be non-negative, got {p}")
    return basis.time_row(p)


def draw_zeta_batch(seed: SeedLike, basis: OrthonormalBasis, m: int, p: int, draws: int) -> ZetaMatrix:
    """draws independent ZetaMatrix realisations stacked on a leading axis."""
    if m < 1:
        raise DomainError(f"need at least one Wiener component, got m={m}")
    if p < 0:
        raise DomainError(f"truncation p must be non-negative, got {p}")
    if draws < 1:
        raise DomainError(f"need at least one draw, got {draws}")
    seed = _as_seed(seed)
    logger.debug("drawing %d zeta matrices m=%d p=%d from %s", draws, m, p, seed)
    values = np.empty((draws, m + 1, p + 1))
    values[:, 0, :] = zeta_time_row(basis, p)
    for i in range(1, m + 1):
        values[:, i, :] = generator(seed, i).standard_normal((draws, p + 1))
    return ZetaMatrix(values)


def draw_zeta(seed: SeedLike, basis: OrthonormalBasis, m: int, p: int) -> ZetaMatrix:
    """One ZetaMatrix; equal to the first entry of the batch drawn from the same seed."""
    return ZetaMatrix(draw_zeta_batch(seed, basis, m, p, 1).values[0])

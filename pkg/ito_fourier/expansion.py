"""
Truncated expansion of an iterated Ito integral.

    J^p = sum_{j <= p} C_{j_k...j_1} (prod_l zeta_{j_l}^(i_l)
          + sum_r (-1)^r sum_{partitions} prod 1{i_g = i_g' != 0} 1{j_g = j_g'} prod zeta_free)

Paired axes of the coefficient tensor are contracted on their diagonal with
numpy.einsum; free axes are contracted against their zeta rows.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from string import ascii_letters
from typing import Iterator, Sequence, Tuple, Union
import logging
import math
import warnings

import numpy as np

from .bases import LegendreBasis
from .exact import exact_table_rationals
from .exceptions import ContractError, DomainError, ValidityWarning
from .models import IntegrationInterval, WeightFunction, ZetaMatrix

logger = logging.getLogger(__name__)

CLOSED_FORMS = ('J1', 'J01', 'J10', 'J11', 'J111')


@dataclass(frozen=True)
class PairPartition:
    """r disjoint unordered pairs of positions plus the ordered free positions (1-based)."""
    pairs: Tuple[Tuple[int, int], ...]
    free: Tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.pairs)

    def fires(self, icomp: Sequence[int]) -> bool:
        """Whether every pair joins two equal nonzero components."""
        return all(icomp[a - 1] == icomp[b - 1] != 0 for a, b in self.pairs)

    def to_dict(self):
        return {'pairs': [list(pair) for pair in self.pairs], 'free': list(self.free)}


def _matchings(positions: Tuple[int, ...]) -> Iterator[Tuple[Tuple[int, int], ...]]:
    if not positions:
        yield ()
        return
    first, rest = positions[0], positions[1:]
    for index, partner in enumerate(rest):
        remaining = rest[:index] + rest[index + 1:]
        for tail in _matchings(remaining):
            yield ((first, partner),) + tail


@lru_cache(maxsize=None)
def _partitions(k: int, r: int) -> Tuple[PairPartition, ...]:
    everything = tuple(range(1, k + 1))
    result = []
    for chosen in combinations(everything, 2 * r):
        free = tuple(g for g in everything if g not in chosen)
        for pairs in _matchings(chosen):
            result.append(PairPartition(pairs, free))
    return tuple(result)


def enumerate_pair_partitions(k: int, r: int) -> Tuple[PairPartition, ...]:
    """
    All ways to pick r disjoint pairs from positions 1..k, each exactly once.

    There are C(k, 2r) (2r - 1)!! of them, listed by the chosen positions in
    lexicographic order and then by matching.
    """
    if k < 1 or not 1 <= r <= k // 2:
        raise DomainError(f"need 1 <= r <= k // 2, got k={k}, r={r}")
    return _partitions(k, r)


def partition_count(k: int, r: int) -> int:
    return math.comb(k, 2 * r) * math.prod(range(2 * r - 1, 0, -2))


def warn_time_component(icomp: Sequence[int], interval: IntegrationInterval) -> None:
    if 0 in icomp and interval.length >= 1.0:
        message = (f"time component used on an interval of length {interval.length:g} >= 1; "
                   "the mean-square estimate is only stated for T - t < 1")
        logger.warning(message)
        warnings.warn(message, ValidityWarning, stacklevel=3)


def _zeta_values(zeta: Union[ZetaMatrix, np.ndarray]) -> np.ndarray:
    values = zeta.values if isinstance(zeta, ZetaMatrix) else np.asarray(zeta, dtype=float)
    if values.ndim < 2:
        raise ContractError(f"zeta needs shape (..., m + 1, p + 1), got {values.shape}")
    return values


def _check_components(icomp: Sequence[int], k: int, m: int) -> Tuple[int, ...]:
    icomp = tuple(int(i) for i in icomp)
    if len(icomp) != k:
        raise ContractError(f"table has k={k} but {len(icomp)} components were given")
    for i in icomp:
        if i < 0 or i > m:
            raise DomainError(f"component {i} outside 0..{m}")
    return icomp


def contract(values: np.ndarray, icomp: Sequence[int], zeta: np.ndarray) -> np.ndarray:
    """Sum of the tensor against products of zeta rows, with every firing pair correction."""
    k = values.ndim
    p = values.shape[0] - 1
    rows = [zeta[..., i, :p + 1] for i in icomp]
    letters = ascii_letters[:k]
    total = np.einsum(f"{letters}," + ",".join(f"...{a}" for a in letters) + "->...",
                      values, *rows, optimize=True)
    batch_shape = zeta.shape[:-2]
    for r in range(1, k // 2 + 1):
        sign = (-1) ** r
        for partition in _partitions(k, r):
            if not partition.fires(icomp):
                continue
            subscripts = list(letters)
            for a, b in partition.pairs:
                subscripts[b - 1] = subscripts[a - 1]
            if partition.free:
                operands = [rows[g - 1] for g in partition.free]
                expression = "".join(subscripts) + "," + ",".join(f"...{subscripts[g - 1]}" for g in partition.free)
                term = np.einsum(expression + "->...", values, *operands, optimize=True)
            else:
                term = np.broadcast_to(np.einsum("".join(subscripts) + "->", values), batch_shape)
            total = total + sign * term
    return total


def evaluate_expansion(table, icomp: Sequence[int], zeta: Union[ZetaMatrix, np.ndarray]):
    """
    Truncated expansion J[psi^(k)]^p for the components icomp.

    zeta may carry leading batch axes; the result then has the batch shape.
    """
    values = _zeta_values(zeta)
    m = values.shape[-2] - 1
    icomp = _check_components(icomp, table.k, m)
    if values.shape[-1] - 1 < table.p:
        raise ContractError(f"zeta covers j <= {values.shape[-1] - 1}, table needs j <= {table.p}")
    warn_time_component(icomp, table.interval)
    result = contract(table.values, icomp, values)
    return float(result) if np.ndim(result) == 0 else result


def expansion_variance(table, icomp: Sequence[int]) -> float:
    """Variance of the expansion for pairwise-distinct nonzero components: sum of C^2."""
    icomp = tuple(icomp)
    if len(icomp) != table.k:
        raise ContractError(f"table has k={table.k} but {len(icomp)} components were given")
    if 0 in icomp or len(set(icomp)) != len(icomp):
        raise ContractError(f"variance identity needs pairwise-distinct nonzero components, got {icomp}")
    return table.squared_sum()


def _rational_table_values(interval: IntegrationInterval, q: int) -> np.ndarray:
    rationals = exact_table_rationals(LegendreBasis(interval), (WeightFunction.one(),) * 3, q)
    values = np.zeros((q + 1,) * 3)
    for jtuple, rational in rationals.items():
        values[jtuple] = rational.to_float(interval)
    return values


def _rows(values: np.ndarray, i: int, q: int) -> np.ndarray:
    if q >= values.shape[-1]:
        raise ContractError(f"zeta covers j <= {values.shape[-1] - 1}, formula needs j = {q}")
    return values[..., i, :q + 1]


def closed_form_low_order(name: str, icomp: Sequence[int], zeta: Union[ZetaMatrix, np.ndarray],
                          interval: IntegrationInterval, truncation: int = 0):
    """
    Direct low-order formulas for psi = 1 and the Legendre system.

    J1 takes (i1,); J01 takes (0, i1); J10 takes (i1, 0); J11 takes (i1, i2);
    J111 takes (i1, i2, i3). Components are listed inner to outer.

    truncation is the largest Legendre index kept. J01 and J10 carry their
    zeta_1 term only for truncation >= 1; the default 0 returns the leading
    term (h^{3/2}/2) zeta_0 alone, so (J01, zeta_0=a, zeta_1=b) on [0, 1]
    gives (a + b/sqrt(3))/2 only with truncation=1.
    """
    if name not in CLOSED_FORMS:
        raise DomainError(f"unknown closed form '{name}', expected one of {CLOSED_FORMS}")
    if truncation < 0:
        raise DomainError(f"truncation must be non-negative, got {truncation}")
    values = _zeta_values(zeta)
    k = {'J1': 1, 'J01': 2, 'J10': 2, 'J11': 2, 'J111': 3}[name]
    icomp = _check_components(icomp, k, values.shape[-2] - 1)
    h = interval.length

    def z(i: int, j: int) -> np.ndarray:
        if j >= values.shape[-1]:
            raise ContractError(f"zeta covers j <= {values.shape[-1] - 1}, formula needs j = {j}")
        return values[..., i, j]

    if name == 'J1':
        result = math.sqrt(h) * z(icomp[0], 0)
    elif name in ('J01', 'J10'):
        inner_time = name == 'J01'
        wiener = icomp[1] if inner_time else icomp[0]
        time = icomp[0] if inner_time else icomp[1]
        if time != 0 or wiener == 0:
            raise ContractError(f"{name} needs one time and one Wiener component in that order, got {icomp}")
        result = z(wiener, 0)
        if truncation >= 1:
            result = result + (1.0 if inner_time else -1.0) * z(wiener, 1) / math.sqrt(3.0)
        result = 0.5 * h ** 1.5 * result
    elif name == 'J11':
        first, second = icomp
        if 0 in icomp:
            raise ContractError(f"J11 needs Wiener components, got {icomp}")
        result = z(first, 0) * z(second, 0)
        for i in range(1, truncation + 1):
            result = result + (z(first, i - 1) * z(second, i) - z(first, i) * z(second, i - 1)) / math.sqrt(
                4 * i * i - 1)
        if first == second:
            result = result - 1.0
        result = 0.5 * h * result
    else:
        if 0 in icomp:
            raise ContractError(f"J111 needs Wiener components, got {icomp}")
        if len(set(icomp)) == 1:
            x = z(icomp[0], 0)
            result = h ** 1.5 * (x ** 3 - 3.0 * x) / 6.0
        else:
            first, second, third = (_rows(values, i, truncation) for i in icomp)
            table = _rational_table_values(interval, truncation)
            result = np.einsum('abc,...a,...b,...c->...', table, first, second, third)
            # Ito corrections: one per pair of equal components, on the matching diagonal
            if icomp[0] == icomp[1]:
                result = result - np.einsum('aac,...c->...', table, third)
            if icomp[1] == icomp[2]:
                result = result - np.einsum('abb,...a->...', table, first)
            if icomp[0] == icomp[2]:
                result = result - np.einsum('aba,...b->...', table, second)
    return float(result) if np.ndim(result) == 0 else result

"""Conditioning diagnostics: can a dataset's distinct values be told apart by a histogram?

A dataset is ill conditioned (ICH) when two distinct values fall in the same
eps-bin, robustly ill conditioned (RICH) when more than ``ln n`` entries are
involved in such collisions, and practically ill conditioned (PICH) when a
single bin of a coarser ``round(sqrt(E) ln E)``-bin grid holds more than
``ln n`` entries spread over at least two distinct values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ._grid import bin_indices, runs
from .dataset import DataSet
from .exceptions import InvalidArgumentsError, InvalidRangeError

__all__ = [
    "DOUBLE_MIN",
    "DOUBLE_MAX",
    "DISTINCT_PER_BIN",
    "ConditioningReport",
    "range_precision_granular",
    "collision_count",
    "is_ich",
    "is_rich",
    "is_pich",
    "pich_bins",
    "estimate_distinct_representables",
    "effective_epsilon_bins",
    "analyze",
]

DOUBLE_MIN = 1e-308
DOUBLE_MAX = 1e308
POSITIVE_REPRESENTABLES = 2.0**63
DISTINCT_PER_BIN = 100
_LOG_SPAN = math.log(DOUBLE_MAX) - math.log(DOUBLE_MIN)


@dataclass(frozen=True)
class ConditioningReport:
    n: int
    distinct_count: int
    rng: float
    pr: Optional[float]
    gr: Optional[float]
    collision_count: int
    max_colliding_bin_count: int
    pich_collision_count: int
    pich_max_colliding_bin_count: int
    verdict_ich: bool
    verdict_rich: bool
    verdict_pich: bool
    t_c: float
    t_E: int
    effective_E: int
    at_mantissa_limit: bool

    def as_dict(self) -> dict:
        return asdict(self)


def range_precision_granular(d: DataSet):
    """Range, precision (smallest gap between distinct values) and their ratio."""
    rng = d.max_value - d.min_value
    if d.is_degenerate:
        return rng, None, None
    pr = float(np.min(np.diff(d.values)))
    return rng, pr, rng / pr


def collision_count(d: DataSet, bins: int, E: Optional[int] = None):
    """Entries in bins holding at least two distinct values, and the largest such bin.

    The ``bins`` equal-width bins tile ``[min - eps/2, max + eps/2]`` with
    ``eps = (max - min) / E``; ``E`` defaults to :func:`effective_epsilon_bins`.
    """
    if int(bins) != bins or bins < 1:
        raise InvalidArgumentsError(f"bins must be a positive integer, got {bins!r}")
    if d.is_degenerate:
        return 0, 0
    if E is None:
        E = effective_epsilon_bins(d)[0]
    idx = bin_indices(d.values, d.min_value, d.max_value - d.min_value, E, int(bins))
    starts = runs(idx)
    sizes = np.diff(np.append(starts, idx.size))
    totals = np.add.reduceat(d.freqs, starts)
    colliding = totals[sizes >= 2]
    if colliding.size == 0:
        return 0, 0
    return int(colliding.sum()), int(colliding.max())


def is_ich(d: DataSet, E: Optional[int] = None) -> bool:
    if E is None:
        E = effective_epsilon_bins(d)[0]
    return collision_count(d, E, E)[0] >= 1


def is_rich(d: DataSet, E: Optional[int] = None) -> bool:
    if E is None:
        E = effective_epsilon_bins(d)[0]
    return collision_count(d, E, E)[0] > math.log(d.n)


def pich_bins(E: int) -> int:
    """Size of the coarse grid used by the PICH test."""
    return max(1, int(round(math.sqrt(E) * math.log(E))))


def is_pich(d: DataSet, E: Optional[int] = None) -> bool:
    """PICH verdict at ``E`` eps-bins (the mantissa-adjusted budget by default).

    Datasets whose range is already at the floating-point resolution limit
    are reported as well conditioned: splitting them cannot separate values.
    """
    E_eff, at_limit = effective_epsilon_bins(d, e_max=E if E is not None else 10**9)
    if at_limit:
        return False
    if E is None:
        E = E_eff
    return collision_count(d, pich_bins(E), E)[1] > math.log(d.n)


def _one_sided(a: float, b: float) -> float:
    a = min(max(a, DOUBLE_MIN), DOUBLE_MAX)
    b = min(max(b, DOUBLE_MIN), DOUBLE_MAX)
    return POSITIVE_REPRESENTABLES * (math.log(b) - math.log(a)) / _LOG_SPAN


def estimate_distinct_representables(lo: float, hi: float) -> float:
    """Approximate number of doubles in ``[lo, hi]`` from a log-uniform density."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise InvalidRangeError(f"need finite lo < hi, got [{lo!r}, {hi!r}]")
    if lo >= 0.0:
        out = _one_sided(lo, hi)
    elif hi <= 0.0:
        out = _one_sided(-hi, -lo)
    else:
        out = _one_sided(DOUBLE_MIN, hi) + _one_sided(DOUBLE_MIN, -lo)
    return max(out, 1.0)


def effective_epsilon_bins(d: DataSet, e_max: int = 10**9):
    """Number of eps-bins the mantissa can support, and whether it had to be reduced.

    ``e_max`` is kept when the range holds at least 100 representable values
    per eps-bin; otherwise E drops to one eps-bin per 100 representables.
    """
    if e_max < 1:
        raise InvalidArgumentsError("e_max must be >= 1")
    if d.is_degenerate:
        return 1, True
    n_d = estimate_distinct_representables(d.min_value, d.max_value)
    if n_d / e_max >= DISTINCT_PER_BIN:
        return int(e_max), False
    return max(1, math.ceil(n_d / DISTINCT_PER_BIN)), True


def analyze(d: DataSet, e_max: int = 10**9) -> ConditioningReport:
    rng, pr, gr = range_precision_granular(d)
    E, at_limit = effective_epsilon_bins(d, e_max)
    t_E = pich_bins(E)
    t_c = math.log(d.n)
    coll, coll_max = collision_count(d, E, E)
    p_coll, p_max = collision_count(d, t_E, E)
    return ConditioningReport(
        n=d.n,
        distinct_count=d.distinct_count,
        rng=rng,
        pr=pr,
        gr=gr,
        collision_count=coll,
        max_colliding_bin_count=coll_max,
        pich_collision_count=p_coll,
        pich_max_colliding_bin_count=p_max,
        verdict_ich=coll >= 1,
        verdict_rich=coll > t_c,
        verdict_pich=(not at_limit) and p_max > t_c,
        t_c=t_c,
        t_E=t_E,
        effective_E=E,
        at_mantissa_limit=at_limit,
    )

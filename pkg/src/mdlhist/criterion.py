"""G-Enum and Enum MDL code lengths for irregular histograms.

All code lengths are in nats. Factorials and binomials go through
``math.lgamma`` so counts up to 1e9 and granularities up to 2**30 stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ._grid import grid_bounds
from .exceptions import (
    IndexOutOfRangeError,
    InconsistentCountsError,
    InconsistentWidthsError,
    InvalidArgumentsError,
    NonPositiveIntegerError,
    NonPositiveNullCostError,
)

__all__ = [
    "LOGSTAR_CONSTANT",
    "HistogramModel",
    "CostBreakdown",
    "universal_code_length",
    "log_binomial",
    "genum_cost",
    "enum_cost",
    "null_cost",
    "merge_delta_terms",
    "merge_delta_cost",
    "level",
]

LOGSTAR_CONSTANT = 2.865064


def universal_code_length(k: int) -> float:
    """Rissanen's log* code length of a positive integer."""
    if int(k) != k or k < 1:
        raise NonPositiveIntegerError(f"log* is defined for integers >= 1, got {k!r}")
    total = math.log(LOGSTAR_CONSTANT)
    term = math.log(k)
    while term > 0.0:
        total += term
        term = math.log(term)
    return total


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k); exactly zero when k is 0 or n."""
    if k < 0 or n < 0 or k > n:
        raise InvalidArgumentsError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True, eq=False)
class HistogramModel:
    """K adjacent intervals over a grid of G g-bins (each made of E/G eps-bins).

    ``widths`` holds the number of g-bins per interval and ``counts`` the
    number of data entries. The value domain is recorded through the data
    minimum and range so that bounds are computed the same way for every
    affine copy of a dataset.
    """

    E: int
    G: int
    widths: np.ndarray
    counts: np.ndarray
    data_min: float = 0.0
    data_range: float = 1.0

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=np.int64).copy()
        counts = np.asarray(self.counts, dtype=np.int64).copy()
        if widths.ndim != 1 or widths.shape != counts.shape or widths.size == 0:
            raise InvalidArgumentsError("widths and counts must be non-empty 1-D arrays of equal length")
        if np.any(widths < 1):
            raise InvalidArgumentsError("every interval spans at least one g-bin")
        if np.any(counts < 0):
            raise InvalidArgumentsError("counts must be nonnegative")
        if not 1 <= self.G <= self.E:
            raise InvalidArgumentsError(f"granularity must satisfy 1 <= G <= E, got G={self.G}, E={self.E}")
        if int(widths.sum()) != self.G:
            raise InconsistentWidthsError(f"widths sum to {int(widths.sum())}, expected G={self.G}")
        if self.data_range < 0:
            raise InvalidArgumentsError("data_range must be nonnegative")
        widths.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "counts", counts)

    @property
    def K(self) -> int:
        return int(self.widths.size)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def intervals(self):
        return list(zip(self.widths.tolist(), self.counts.tolist()))

    @property
    def epsilon(self) -> float:
        return self.data_range / self.E

    @property
    def domain_lower(self) -> float:
        return float(self.bounds()[0])

    @property
    def domain_upper(self) -> float:
        return float(self.bounds()[-1])

    def boundary_positions(self) -> np.ndarray:
        """Cumulative g-bin offsets of the K+1 interval bounds."""
        return np.concatenate(([0], np.cumsum(self.widths)))

    def bounds(self) -> np.ndarray:
        """Interval bounds in the value domain (K+1 increasing reals)."""
        if self.data_range == 0.0:
            lo, hi = _degenerate_domain(self.data_min)
            return lo + (hi - lo) * (self.boundary_positions() / self.G)
        return grid_bounds(self.boundary_positions(), self.G, self.data_min, self.data_range, self.E)

    def with_intervals(self, widths, counts) -> "HistogramModel":
        return HistogramModel(self.E, self.G, widths, counts, self.data_min, self.data_range)

    def merged(self, k: int) -> "HistogramModel":
        """Copy with intervals ``k`` and ``k + 1`` (0-based) merged."""
        if not 0 <= k < self.K - 1:
            raise IndexOutOfRangeError(f"cannot merge interval {k} with its right neighbour (K={self.K})")
        w = self.widths.tolist()
        h = self.counts.tolist()
        w[k : k + 2] = [w[k] + w[k + 1]]
        h[k : k + 2] = [h[k] + h[k + 1]]
        return self.with_intervals(w, h)

    def __eq__(self, other):
        if not isinstance(other, HistogramModel):
            return NotImplemented
        return (
            self.E == other.E
            and self.G == other.G
            and np.array_equal(self.widths, other.widths)
            and np.array_equal(self.counts, other.counts)
            and self.data_min == other.data_min
            and self.data_range == other.data_range
        )

    def __repr__(self):
        return f"HistogramModel(K={self.K}, G={self.G}, E={self.E}, n={self.n})"


def _degenerate_domain(value: float):
    # A single distinct value gets a unit-width interval centred on it.
    lo, hi = value - 0.5, value + 0.5
    if not lo < value:
        lo = np.nextafter(value, -np.inf)
    if not value < hi:
        hi = np.nextafter(value, np.inf)
    return lo, hi


@dataclass(frozen=True)
class CostBreakdown:
    """The six additive terms of the criterion, in nats."""

    num_intervals_prior: float
    granularity_prior: float
    boundary_prior: float
    multinomial_choice: float
    multinomial_factorial: float
    bin_index: float

    @property
    def total(self) -> float:
        return (
            self.num_intervals_prior
            + self.granularity_prior
            + self.boundary_prior
            + self.multinomial_choice
            + self.multinomial_factorial
            + self.bin_index
        )

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["total"] = self.total
        return out


def _check_counts(model: HistogramModel, n: int):
    if model.n != n:
        raise InconsistentCountsError(f"interval counts sum to {model.n}, expected n={n}")
    if int(model.widths.sum()) != model.G:
        raise InconsistentWidthsError("interval widths do not sum to G")


def _multinomial_factorial(counts, n: int) -> float:
    return math.lgamma(n + 1) - math.fsum(math.lgamma(h + 1) for h in counts.tolist())


def genum_cost(model: HistogramModel, n: int) -> CostBreakdown:
    _check_counts(model, n)
    K, G, E = model.K, model.G, model.E
    widths = model.widths.tolist()
    counts = model.counts.tolist()
    bin_index = math.fsum(h * math.log(w) for w, h in zip(widths, counts) if h) + n * math.log(E / G)
    return CostBreakdown(
        num_intervals_prior=universal_code_length(K),
        granularity_prior=universal_code_length(G),
        boundary_prior=log_binomial(G + K - 1, K - 1),
        multinomial_choice=log_binomial(n + K - 1, K - 1),
        multinomial_factorial=_multinomial_factorial(model.counts, n),
        bin_index=bin_index,
    )


def enum_cost(model: HistogramModel, n: int) -> CostBreakdown:
    """Enum criterion of a model whose widths are read directly as eps-bin counts."""
    _check_counts(model, n)
    K, E = model.K, model.E
    widths = model.widths.tolist()
    counts = model.counts.tolist()
    return CostBreakdown(
        num_intervals_prior=universal_code_length(K),
        granularity_prior=0.0,
        boundary_prior=log_binomial(E + K - 1, K - 1),
        multinomial_choice=log_binomial(n + K - 1, K - 1),
        multinomial_factorial=_multinomial_factorial(model.counts, n),
        bin_index=math.fsum(h * math.log(w) for w, h in zip(widths, counts) if h),
    )


def null_cost(n: int, E: int) -> float:
    """Cost of the single-interval model at granularity 1."""
    return 2.0 * universal_code_length(1) + n * math.log(E)


def _width_delta(wa: int, ha: int, wb: int, hb: int) -> float:
    # (ha+hb) ln(wa+wb) - ha ln wa - hb ln wb, written with log1p so that a
    # one-bin extension of a very wide interval does not cancel to zero.
    out = 0.0
    if ha:
        out += ha * math.log1p(wb / wa)
    if hb:
        out += hb * math.log1p(wa / wb)
    return out


def merge_delta_terms(model: HistogramModel, k: int, n: int) -> CostBreakdown:
    """Per-term cost change of merging intervals ``k`` and ``k + 1`` (0-based).

    Only the terms touched by the merge are evaluated, so the cost is O(1)
    in the number of intervals.
    """
    K = model.K
    if not 0 <= k < K - 1:
        raise IndexOutOfRangeError(f"merge index {k} out of range for K={K}")
    G = model.G
    wa, wb = int(model.widths[k]), int(model.widths[k + 1])
    ha, hb = int(model.counts[k]), int(model.counts[k + 1])
    return CostBreakdown(
        num_intervals_prior=universal_code_length(K - 1) - universal_code_length(K),
        granularity_prior=0.0,
        # C(N - 1, k - 1) / C(N, k) = k / N, free of the cancellation in a difference of logs
        boundary_prior=math.log((K - 1) / (G + K - 1)),
        multinomial_choice=math.log((K - 1) / (n + K - 1)),
        multinomial_factorial=-log_binomial(ha + hb, ha),
        bin_index=_width_delta(wa, ha, wb, hb),
    )


def merge_delta_cost(model: HistogramModel, k: int, n: int) -> float:
    return merge_delta_terms(model, k, n).total


def level(model_cost: float, null_cost: float) -> float:
    """Compression rate of a model relative to the single-interval model."""
    if not null_cost > 0:
        raise NonPositiveNullCostError(f"null cost must be positive, got {null_cost!r}")
    return 1.0 - model_cost / null_cost

"""Two-level histograms for data that a single grid cannot resolve.

When some coarse bin mixes many distinct values (the dataset is PICH), the
data is first cut into subsets using a histogram of its signed logarithm.
Adjacent subsets are merged back whenever their union is well conditioned,
subsets that are still ill conditioned are split geometrically, each subset
gets its own standard histogram, and the seams between neighbouring
sub-histograms are rebuilt from the data on both sides of each gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .conditioning import effective_epsilon_bins, is_pich, pich_bins
from .dataset import DataSet
from .exceptions import (
    BuildError,
    EmptyInputError,
    InvalidArgumentsError,
    InvariantViolationError,
    NotPichError,
    UnsplittableDegenerateError,
)
from .logdomain import log_dataset_cr
from .optimizer import BuildOptions, BuildResult, assign_intervals, build_standard

__all__ = [
    "Subset",
    "SubsetPartition",
    "SplitPlan",
    "Interval",
    "GlobalHistogram",
    "first_level_partition",
    "merge_adjacent_pwch",
    "plan_split",
    "split_pich_subset",
    "build_boundary",
    "build_two_level",
    "from_standard",
]


class Subset(NamedTuple):
    """Entries ``start:stop`` of the source DataSet."""

    start: int
    stop: int
    data: DataSet
    pwch: bool
    origin: str
    at_mantissa_limit: bool = False


@dataclass(frozen=True)
class SubsetPartition:
    source: DataSet
    subsets: List[Subset]

    @property
    def covering(self) -> bool:
        pos = 0
        for s in self.subsets:
            if s.start != pos or s.stop <= s.start:
                return False
            pos = s.stop
        return pos == self.source.distinct_count

    def __len__(self):
        return len(self.subsets)


@dataclass(frozen=True)
class SplitPlan:
    """Geometric split of ``[a, b]`` into ``k`` pieces of equal log width.

    ``cut_points`` holds all ``k + 1`` edges, ``a`` and ``b`` included.
    ``forced`` marks plans where no k satisfied the prediction and every
    entry was given its own piece.
    """

    k: int
    cut_points: np.ndarray
    predicted_first_bin_count: float
    predicted_piece_count: float
    forced: bool = False


class Interval(NamedTuple):
    lower: float
    upper: float
    count: int
    density: float
    boundary: bool
    subset: int


@dataclass(frozen=True)
class GlobalHistogram:
    n: int
    intervals: List[Interval]
    subset_count: int
    two_level_triggered: bool
    per_subset_granularity: List[tuple]
    total_cost_per_subset: List[float]
    subset_ranges: List[tuple] = field(default_factory=list)
    standard: Optional[BuildResult] = field(default=None, repr=False, compare=False)

    @property
    def K(self) -> int:
        return len(self.intervals)

    @property
    def bounds(self) -> np.ndarray:
        iv = self.intervals
        return np.array([iv[0].lower] + [i.upper for i in iv], dtype=np.float64)

    @property
    def counts(self) -> np.ndarray:
        return np.array([i.count for i in self.intervals], dtype=np.int64)

    @property
    def densities(self) -> np.ndarray:
        return np.array([i.density for i in self.intervals], dtype=np.float64)

    def validate(self):
        """Raise :class:`InvariantViolationError` unless counts and tiling are consistent."""
        if not self.intervals:
            raise InvariantViolationError("histogram has no intervals")
        if int(self.counts.sum()) != self.n:
            raise InvariantViolationError(f"interval counts sum to {int(self.counts.sum())}, expected {self.n}")
        for left, right in zip(self.intervals[:-1], self.intervals[1:]):
            if left.upper != right.lower:
                raise InvariantViolationError(f"gap or overlap between {left} and {right}")
        for iv in self.intervals:
            if not iv.lower < iv.upper:
                raise InvariantViolationError(f"interval {iv} has non-positive width")
        return self

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "subset_count": self.subset_count,
            "two_level_triggered": self.two_level_triggered,
            "per_subset_granularity": [{"G": int(G), "E": int(E)} for G, E in self.per_subset_granularity],
            "total_cost_per_subset": [float(c) for c in self.total_cost_per_subset],
            "intervals": [
                {
                    "lower": float(iv.lower),
                    "upper": float(iv.upper),
                    "count": int(iv.count),
                    "density": float(iv.density),
                    "boundary": bool(iv.boundary),
                    "subset": int(iv.subset),
                }
                for iv in self.intervals
            ],
        }


def _options(opts, kwargs) -> BuildOptions:
    if opts is None:
        return BuildOptions(**kwargs)
    if kwargs:
        raise InvalidArgumentsError("pass either BuildOptions or keyword options, not both")
    return opts


def _is_pich(d: DataSet, opts: BuildOptions) -> bool:
    return is_pich(d, opts.force_E if opts.force_E is not None else opts.e_max)


def _make_subset(d: DataSet, start: int, stop: int, origin: str, opts: BuildOptions) -> Subset:
    data = d.take(start, stop)
    at_limit = effective_epsilon_bins(data, opts.e_max)[1] and not data.is_degenerate
    return Subset(start, stop, data, not is_pich(data, opts.e_max), origin, at_limit)


def first_level_partition(d: DataSet, opts: Optional[BuildOptions] = None, **kwargs) -> SubsetPartition:
    """Cut ``d`` into the runs of entries that share an interval of its log-domain histogram."""
    opts = _options(opts, kwargs)
    logd, _, where = log_dataset_cr(d, return_index=True)
    try:
        res = build_standard(logd, BuildOptions(e_max=opts.e_max, early_stop=True))
    except Exception as exc:  # surfaced as a build failure of the first level
        raise BuildError(f"log-domain histogram failed: {exc}") from exc
    interval = assign_intervals(res.model, logd)[where]
    cuts = np.flatnonzero(np.diff(interval)) + 1
    edges = np.concatenate(([0], cuts, [d.distinct_count]))
    subsets = [_make_subset(d, int(a), int(b), "log-interval", opts) for a, b in zip(edges[:-1], edges[1:])]
    return SubsetPartition(d, subsets)


def merge_adjacent_pwch(p: SubsetPartition, opts: Optional[BuildOptions] = None, **kwargs) -> SubsetPartition:
    """Merge neighbouring subsets whose union is well conditioned, sweeping left to right to a fixpoint."""
    opts = _options(opts, kwargs)
    d = p.source
    subsets = list(p.subsets)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(subsets) - 1:
            left, right = subsets[i], subsets[i + 1]
            union = _make_subset(d, left.start, right.stop, "merged", opts)
            if union.pwch:
                subsets[i : i + 2] = [union]
                changed = True
            else:
                i += 1
    return SubsetPartition(d, subsets)


def _first_bin_count(n, log_span, k, t_E):
    # Entries expected in the first of t_E equal bins over the first of k
    # geometric pieces, assuming the n/k entries of a piece spread evenly in log.
    k = np.asarray(k, dtype=np.float64)
    step = log_span / k
    return (n / k) * np.log1p(np.expm1(step) / t_E) / step


def _predicate(n, log_span, k, t_E):
    k = np.asarray(k, dtype=np.float64)
    return _first_bin_count(n, log_span, k, t_E) < np.log(n / k)


def plan_split(a: float, b: float, n: int, t_E: int) -> SplitPlan:
    """Smallest k >= 2 whose geometric split of ``[a, b]`` (``0 < a < b``) is predicted well conditioned.

    Solved by bisection over ``[2, n // 2]``; the result is checked against
    every smaller k and replaced by a linear scan over ``[2, n]`` when the
    predicate turns out not to be monotone there.
    """
    if not 0 < a < b:
        raise InvalidArgumentsError(f"plan_split needs 0 < a < b, got [{a!r}, {b!r}]")
    if n < 2:
        raise InvalidArgumentsError("a split needs at least two entries")
    log_span = math.log(b) - math.log(a)
    k = None
    hi = n // 2
    if hi >= 2 and _predicate(n, log_span, hi, t_E):
        lo = 2
        if _predicate(n, log_span, lo, t_E):
            k = lo
        else:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if _predicate(n, log_span, mid, t_E):
                    hi = mid
                else:
                    lo = mid
            k = hi
        smaller = np.flatnonzero(_predicate(n, log_span, np.arange(2, k), t_E))
        if smaller.size:
            k = int(smaller[0]) + 2
    forced = False
    if k is None:
        ks = np.arange(2, n + 1)
        ok = np.flatnonzero(_predicate(n, log_span, ks, t_E))
        if ok.size:
            k = int(ks[ok[0]])
        else:
            k, forced = n, True
    cuts = np.exp(math.log(a) + np.arange(k + 1) * (log_span / k))
    cuts[0], cuts[-1] = a, b
    return SplitPlan(
        k=int(k),
        cut_points=cuts,
        predicted_first_bin_count=float(_first_bin_count(n, log_span, k, t_E)),
        predicted_piece_count=n / k,
        forced=forced,
    )


def _pieces(s: DataSet, edges):
    # Piece j holds values in [edges[j], edges[j+1]); the last piece is closed.
    piece = np.searchsorted(edges[1:-1], s.values, side="right")
    starts = np.flatnonzero(np.r_[True, np.diff(piece) != 0])
    stops = np.r_[starts[1:], s.distinct_count]
    return [(int(a), int(b)) for a, b in zip(starts, stops)]


def split_pich_subset(s: DataSet, t_E: Optional[int] = None, E: Optional[int] = None):
    """Split a same-sign PICH dataset into geometric pieces.

    Returns the :class:`SplitPlan` and the nonempty pieces as ``(start, stop)``
    entry ranges of ``s`` together with their DataSets.
    """
    if s.is_degenerate:
        raise UnsplittableDegenerateError("a single distinct value cannot be split")
    if s.min_value < 0 < s.max_value or (s.min_value == 0.0 and s.distinct_count > 1) or s.max_value == 0.0:
        raise InvalidArgumentsError("split_pich_subset needs values of a single strict sign")
    if E is None:
        E = effective_epsilon_bins(s)[0]
    if not is_pich(s, E):
        raise NotPichError("subset is already well conditioned")
    if t_E is None:
        t_E = pich_bins(E)
    if s.min_value > 0:
        plan = plan_split(s.min_value, s.max_value, s.n, t_E)
        edges = plan.cut_points
    else:
        plan = plan_split(-s.max_value, -s.min_value, s.n, t_E)
        mirrored = -plan.cut_points[::-1]
        plan = SplitPlan(plan.k, mirrored, plan.predicted_first_bin_count, plan.predicted_piece_count, plan.forced)
        edges = mirrored
    ranges = _pieces(s, edges)
    return plan, [(a, b, s.take(a, b)) for a, b in ranges]


def _split_subset(d: DataSet, sub: Subset, opts: BuildOptions) -> List[Subset]:
    """Split a PICH subset: at zero first, then each still-PICH sign part geometrically."""
    v = sub.data.values
    sign_edges = [0, int(np.searchsorted(v, 0.0, "left")), int(np.searchsorted(v, 0.0, "right")), v.size]
    out = []
    for a, b in zip(sign_edges[:-1], sign_edges[1:]):
        if a == b:
            continue
        part = _make_subset(d, sub.start + a, sub.start + b, "split", opts)
        if part.pwch or part.data.is_degenerate:
            out.append(part)
            continue
        E = effective_epsilon_bins(part.data, opts.e_max)[0]
        plan, pieces = split_pich_subset(part.data, E=E)
        for pa, pb, _ in pieces:
            piece = _make_subset(d, part.start + pa, part.start + pb, "split", opts)
            if not piece.pwch:
                piece = piece._replace(at_mantissa_limit=True)
            out.append(piece)
    return out


class _Record(NamedTuple):
    lower: float
    upper: float
    count: int
    start: int
    stop: int
    subset: int
    boundary: bool


def _records(res: BuildResult, sub: Subset, index: int) -> List[_Record]:
    model = res.model
    bounds = model.bounds()
    where = assign_intervals(model, sub.data)
    first = np.searchsorted(where, np.arange(model.K + 1), side="left") + sub.start
    return [
        _Record(float(bounds[k]), float(bounds[k + 1]), int(model.counts[k]), int(first[k]), int(first[k + 1]), index, False)
        for k in range(model.K)
    ]


def build_boundary(d: DataSet, left: _Record, right: _Record, opts: BuildOptions) -> List[_Record]:
    """Rebuild the seam between two neighbouring sub-histograms.

    A standard histogram of the entries of ``left`` and ``right`` is built;
    its interval containing the middle of the empty gap becomes the boundary
    interval and the data on either side of it the left and right
    remainders. Remainders without entries, or whose bounds would not
    increase, are absorbed into the boundary interval.
    """
    if left.stop != right.start:
        raise InvalidArgumentsError("boundary records must be adjacent")
    data = d.take(left.start, right.stop)
    try:
        res = build_standard(data, BuildOptions(e_max=opts.e_max, early_stop=opts.early_stop))
    except Exception as exc:
        raise BuildError(f"boundary histogram failed: {exc}") from exc
    model = res.model
    bounds = model.bounds()
    gap_mid = d.values[left.stop - 1] / 2 + d.values[right.start] / 2
    j = int(np.clip(np.searchsorted(bounds, gap_mid, side="right") - 1, 0, model.K - 1))
    where = assign_intervals(model, data)
    n_left = int(np.searchsorted(where, j, side="left"))
    n_mid = int(np.searchsorted(where, j, side="right"))
    freqs = data.freqs
    c_left = int(freqs[:n_left].sum())
    c_mid = int(freqs[n_left:n_mid].sum())
    c_right = int(freqs[n_mid:].sum())
    lo, hi = float(bounds[j]), float(bounds[j + 1])
    subset = left.subset
    out = []
    if c_left > 0 and left.lower < lo < hi:
        out.append(_Record(left.lower, lo, c_left, left.start, left.start + n_left, left.subset, False))
    else:
        lo, c_mid, n_left = left.lower, c_mid + c_left, 0
    keep_right = c_right > 0 and lo < hi < right.upper
    if not keep_right:
        hi, c_mid, n_mid = right.upper, c_mid + c_right, data.distinct_count
    out.append(_Record(lo, hi, c_mid, left.start + n_left, left.start + n_mid, subset, True))
    if keep_right:
        out.append(_Record(hi, right.upper, c_right, left.start + n_mid, right.stop, right.subset, False))
    return out


def _histogram(d: DataSet, records, subsets, results, triggered) -> GlobalHistogram:
    n = d.n
    intervals = [
        Interval(r.lower, r.upper, r.count, r.count / (n * (r.upper - r.lower)), r.boundary, r.subset) for r in records
    ]
    return GlobalHistogram(
        n=n,
        intervals=intervals,
        subset_count=len(subsets),
        two_level_triggered=triggered,
        per_subset_granularity=[(r.granularity, r.model.E) for r in results],
        total_cost_per_subset=[r.cost.total for r in results],
        subset_ranges=[(float(s.data.min_value), float(s.data.max_value)) for s in subsets],
    )


def from_standard(d: DataSet, res: BuildResult) -> GlobalHistogram:
    """Wrap a standard build as a one-subset global histogram."""
    sub = Subset(0, d.distinct_count, d, True, "log-interval")
    bounds = res.model.bounds()
    records = [
        _Record(float(bounds[k]), float(bounds[k + 1]), int(res.model.counts[k]), 0, 0, 0, False)
        for k in range(res.model.K)
    ]
    hist = _histogram(d, records, [sub], [res], False)
    object.__setattr__(hist, "standard", res)
    return hist


def build_two_level(d: DataSet, opts: Optional[BuildOptions] = None, force: bool = False, **kwargs) -> GlobalHistogram:
    """Histogram of ``d``, switching to the two-level construction when ``d`` is PICH.

    With ``force`` the two-level construction runs on any dataset with at
    least two distinct values.
    """
    if d is None or d.n == 0:
        raise EmptyInputError("cannot build a histogram of an empty dataset")
    opts = _options(opts, kwargs)
    if d.is_degenerate or not (force or _is_pich(d, opts)):
        return from_standard(d, build_standard(d, opts))

    partition = merge_adjacent_pwch(first_level_partition(d, opts), opts)
    split: List[Subset] = []
    for sub in partition.subsets:
        if sub.pwch or sub.at_mantissa_limit or sub.data.is_degenerate:
            split.append(sub)
        else:
            split.extend(_split_subset(d, sub, opts))
    # Splitting at zero can leave a piece that is well conditioned together
    # with its neighbour from the other side of the cut; merge those again.
    subsets = merge_adjacent_pwch(SubsetPartition(d, split), opts).subsets if len(split) > len(partition) else split

    sub_opts = BuildOptions(e_max=opts.e_max, early_stop=opts.early_stop)
    results = []
    records: List[_Record] = []
    for index, sub in enumerate(subsets):
        try:
            res = build_standard(sub.data, sub_opts)
        except Exception as exc:
            raise BuildError(f"sub-histogram {index} failed: {exc}") from exc
        results.append(res)
        records.extend(_records(res, sub, index))

    for sub in subsets[1:]:
        r = next(i for i, rec in enumerate(records) if rec.start >= sub.start and rec.count > 0)
        left, right = records[r - 1], records[r]
        if left.count == 0 or left.stop != sub.start:
            raise InvariantViolationError("sub-histogram edge intervals must hold data")
        records[r - 1 : r + 1] = build_boundary(d, left, right, opts)

    return _histogram(d, records, subsets, results, True).validate()

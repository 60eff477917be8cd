"""Standard (single-level) G-Enum histogram construction.

For each granularity G the data is binned into G g-bins, a greedy
bottom-up merge picks the best model along its merge path, and a hill
climb over boundary moves, removals and insertions polishes it. The
granularity with the lowest total cost wins.

Boundaries are only ever placed at *atom* edges, where an atom is a
nonempty g-bin or a maximal run of empty g-bins. For fixed counts the
cost ``h_a ln w_a + h_b ln w_b`` of a boundary sliding through an empty run
is concave in its position, so an optimum always exists with every
boundary on an atom edge; restricting the search loses nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from ._grid import bin_indices, runs
from .conditioning import effective_epsilon_bins
from .criterion import CostBreakdown, HistogramModel, genum_cost
from .dataset import DataSet
from .exceptions import DegenerateDomainError, EmptyInputError, InvalidArgumentsError

__all__ = [
    "MAX_GRANULARITY",
    "BuildOptions",
    "BuildResult",
    "Granularization",
    "granularize",
    "granularities",
    "greedy_build",
    "post_optimize",
    "build_standard",
    "assign_intervals",
]

MAX_GRANULARITY = 2**30
MAX_SWEEPS = 20
EARLY_STOP_PATIENCE = 3


@dataclass(frozen=True)
class BuildOptions:
    """Options of :func:`build_standard`.

    Parameters
    ----------
    e_max : int
        Upper bound on the number of eps-bins.
    early_stop : bool
        Stop the granularity loop once ``G > sqrt(n)`` and three successive
        granularities failed to improve the best cost.
    force_E : int, optional
        Use this many eps-bins instead of the mantissa-adjusted budget.
    """

    e_max: int = 10**9
    early_stop: bool = False
    force_E: Optional[int] = None

    def __post_init__(self):
        if int(self.e_max) != self.e_max or self.e_max < 1:
            raise InvalidArgumentsError("e_max must be a positive integer")
        if self.force_E is not None and (int(self.force_E) != self.force_E or self.force_E < 1):
            raise InvalidArgumentsError("force_E must be a positive integer")


@dataclass(frozen=True, eq=False)
class Granularization:
    """Data binned on G g-bins, stored sparsely as the list of nonempty bins.

    ``entry_bins`` gives the g-bin of every DataSet entry; ``bins``, ``counts``
    and ``multi`` describe each nonempty bin (index, entry total, whether it
    holds two or more distinct values).
    """

    G: int
    E: int
    data_min: float
    data_range: float
    entry_bins: np.ndarray
    bins: np.ndarray
    counts: np.ndarray
    multi: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def epsilon(self) -> float:
        return self.data_range / self.E

    @property
    def domain_lower(self) -> float:
        return self.data_min - self.epsilon / 2

    @property
    def domain_upper(self) -> float:
        return self.data_min + self.data_range + self.epsilon / 2

    @property
    def bin_counts(self) -> np.ndarray:
        """Dense length-G count vector (allocates G integers)."""
        out = np.zeros(self.G, dtype=np.int64)
        out[self.bins] = self.counts
        return out

    @property
    def bin_has_multiple_distinct(self) -> np.ndarray:
        out = np.zeros(self.G, dtype=bool)
        out[self.bins] = self.multi
        return out

    def atoms(self, cuts=()):
        """Widths and counts of the atoms, split further at the given g-bin cuts."""
        b = self.bins
        edges = [b, b + 1]
        if len(cuts):
            edges.append(np.asarray(cuts, dtype=np.int64))
        edges = np.unique(np.concatenate([[0, self.G], *edges]))
        edges = edges[(edges >= 0) & (edges <= self.G)]
        widths = np.diff(edges)
        dense_pos = np.searchsorted(edges, b, side="right") - 1
        counts = np.zeros(widths.size, dtype=np.int64)
        np.add.at(counts, dense_pos, self.counts)
        return edges, widths, counts


class BuildResult(NamedTuple):
    model: HistogramModel
    cost: CostBreakdown
    granularity: int


def granularize(d: DataSet, G: int, E: int) -> Granularization:
    """Bin ``d`` on G equal g-bins of the extended domain with E eps-bins."""
    if int(G) != G or G < 1 or int(E) != E or E < 1:
        raise InvalidArgumentsError(f"G and E must be positive integers, got G={G!r}, E={E!r}")
    if d.is_degenerate and G > 1:
        raise DegenerateDomainError("a single distinct value admits only G = 1")
    vrange = d.max_value - d.min_value
    idx = bin_indices(d.values, d.min_value, vrange, E, int(G))
    starts = runs(idx)
    sizes = np.diff(np.append(starts, idx.size))
    idx.flags.writeable = False
    return Granularization(
        G=int(G),
        E=int(E),
        data_min=d.min_value,
        data_range=vrange,
        entry_bins=idx,
        bins=idx[starts],
        counts=np.add.reduceat(d.freqs, starts),
        multi=sizes >= 2,
    )


def granularities(E: int):
    """Powers of two below ``min(2**30, E)``, then that cap itself."""
    cap = min(MAX_GRANULARITY, int(E))
    out = []
    G = 1
    while G < cap:
        out.append(G)
        G *= 2
    out.append(cap)
    return out


def _model_from_cuts(gr: Granularization, edges, W, H, cuts) -> HistogramModel:
    positions = edges[cuts]
    counts = H[cuts[1:]] - H[cuts[:-1]]
    return HistogramModel(gr.E, gr.G, np.diff(positions), counts, gr.data_min, gr.data_range)


def _prefix(a):
    return np.concatenate(([0], np.cumsum(a))).astype(np.int64)


def greedy_build(gr: Granularization, n: int) -> HistogramModel:
    """Best model along the greedy merge path starting from one interval per atom."""
    if gr.n != n:
        raise InvalidArgumentsError(f"granularization holds {gr.n} entries, expected {n}")
    edges, widths, counts = gr.atoms()
    order, best = _kernels.greedy_merge(widths, counts, gr.G, n)
    removed = np.zeros(widths.size + 1, dtype=bool)
    removed[order[:best]] = True
    cuts = np.flatnonzero(~removed)
    return _model_from_cuts(gr, edges, _prefix(widths), _prefix(counts), cuts)


def _tolerance(n):
    return 1e-11 * (1.0 + n)


def post_optimize(model: HistogramModel, gr: Granularization, n: int) -> HistogramModel:
    """Hill climb over boundary moves, removals and insertions until no move improves."""
    if model.G != gr.G or model.E != gr.E:
        raise InvalidArgumentsError("model and granularization disagree on G or E")
    edges, widths, counts = gr.atoms(model.boundary_positions())
    W, H = _prefix(widths), _prefix(counts)
    cuts = np.searchsorted(edges, model.boundary_positions()).astype(np.int64)
    new_cuts, _ = _kernels.post_optimize(W, H, cuts, gr.G, n, MAX_SWEEPS, _tolerance(n))
    if np.array_equal(new_cuts, cuts):
        return model
    return _model_from_cuts(gr, edges, W, H, new_cuts)


def _degenerate_result(d: DataSet) -> BuildResult:
    model = HistogramModel(1, 1, [1], [d.n], d.min_value, 0.0)
    return BuildResult(model, genum_cost(model, d.n), 1)


def build_standard(d: DataSet, opts: Optional[BuildOptions] = None, **kwargs) -> BuildResult:
    """Lowest-cost G-Enum histogram over granularities ``G = 1, 2, 4, ...``.

    Keyword arguments are forwarded to :class:`BuildOptions` when ``opts``
    is not given. Ties between granularities keep the smaller G.
    """
    if d is None or d.n == 0:
        raise EmptyInputError("cannot build a histogram of an empty dataset")
    if opts is None:
        opts = BuildOptions(**kwargs)
    if d.is_degenerate:
        return _degenerate_result(d)
    E = opts.force_E if opts.force_E is not None else effective_epsilon_bins(d, opts.e_max)[0]
    n = d.n
    root_n = math.sqrt(n)
    best = None
    stale = 0
    for G in granularities(E):
        gr = granularize(d, G, E)
        model = post_optimize(greedy_build(gr, n), gr, n)
        cost = genum_cost(model, n)
        if best is None or cost.total < best.cost.total:
            best = BuildResult(model, cost, G)
            stale = 0
        else:
            stale += 1
        if opts.early_stop and G > root_n and stale >= EARLY_STOP_PATIENCE:
            break
    return best


def assign_intervals(model: HistogramModel, d: DataSet) -> np.ndarray:
    """Interval index of every entry of ``d`` under ``model``'s grid."""
    idx = bin_indices(d.values, model.data_min, model.data_range, model.E, model.G)
    return np.searchsorted(model.boundary_positions()[1:], idx, side="right")

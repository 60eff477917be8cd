"""scikit-learn style estimators wrapping the histogram builders."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dataset import DataSet
from .exceptions import InvalidArgumentsError
from .optimizer import BuildOptions, build_standard
from .twolevel import build_two_level, from_standard

__all__ = ["GEnumHistogram", "TwoLevelHistogram"]

MODES = ("auto", "standard", "two-level")


def _column(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=np.float64, ensure_all_finite=True)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise InvalidArgumentsError(f"expected a single feature, got {X.shape[1]}")
        X = X[:, 0]
    return X


class _HistogramDensity(TransformerMixin, DensityMixin, BaseEstimator):
    """Shared prediction side: bin lookup and piecewise-constant log density."""

    def _options(self):
        return BuildOptions(e_max=self.e_max, early_stop=self.early_stop, force_E=self.force_E)

    def _store(self, hist):
        self.histogram_ = hist
        self.bin_edges_ = hist.bounds
        self.counts_ = hist.counts
        self.densities_ = hist.densities
        self.n_bins_ = hist.K
        self.n_features_in_ = 1
        return self

    def _locate(self, x):
        edges = self.bin_edges_
        idx = np.searchsorted(edges, x, side="left") - 1
        return np.clip(idx, 0, self.n_bins_ - 1), (x >= edges[0]) & (x <= edges[-1])

    def transform(self, X):
        """Interval index of every sample, as a single integer column."""
        check_is_fitted(self, "bin_edges_")
        idx, _ = self._locate(_column(X))
        return idx.reshape(-1, 1)

    def score_samples(self, X):
        """Log density of every sample; ``-inf`` outside the histogram's support."""
        check_is_fitted(self, "bin_edges_")
        idx, inside = self._locate(_column(X))
        dens = np.where(inside, self.densities_[idx], 0.0)
        with np.errstate(divide="ignore"):
            return np.log(dens)

    def score(self, X, y=None):
        """Total log-likelihood of ``X``."""
        return float(np.sum(self.score_samples(X)))


class GEnumHistogram(_HistogramDensity):
    """Single-level G-Enum histogram.

    Parameters
    ----------
    early_stop : bool, default=False
        Stop the granularity search early once it stops improving.
    e_max : int, default=10**9
        Maximum number of eps-bins.
    force_E : int or None, default=None
        Fixed number of eps-bins, bypassing the floating-point budget rule.

    Attributes
    ----------
    model_ : HistogramModel
    cost_ : CostBreakdown
    granularity_ : int
    bin_edges_ : ndarray of shape (n_bins_ + 1,)
    counts_ : ndarray of shape (n_bins_,)
    densities_ : ndarray of shape (n_bins_,)
    """

    def __init__(self, early_stop=False, e_max=10**9, force_E=None):
        self.early_stop = early_stop
        self.e_max = e_max
        self.force_E = force_E

    def fit(self, X, y=None):
        d = DataSet.from_values(_column(X))
        res = build_standard(d, self._options())
        self.model_ = res.model
        self.cost_ = res.cost
        self.granularity_ = res.granularity
        return self._store(from_standard(d, res))


class TwoLevelHistogram(_HistogramDensity):
    """Histogram that switches to the two-level construction on PICH data.

    Parameters
    ----------
    mode : {"auto", "standard", "two-level"}, default="auto"
        ``auto`` tests the data and uses the two-level construction only
        when needed; ``two-level`` runs it unconditionally.
    early_stop : bool, default=False
    e_max : int, default=10**9
    force_E : int or None, default=None

    Attributes
    ----------
    histogram_ : GlobalHistogram
    bin_edges_, counts_, densities_ : ndarray
    """

    def __init__(self, mode="auto", early_stop=False, e_max=10**9, force_E=None):
        self.mode = mode
        self.early_stop = early_stop
        self.e_max = e_max
        self.force_E = force_E

    def fit(self, X, y=None):
        if self.mode not in MODES:
            raise InvalidArgumentsError(f"mode must be one of {MODES}, got {self.mode!r}")
        d = DataSet.from_values(_column(X))
        opts = self._options()
        if self.mode == "standard":
            hist = from_standard(d, build_standard(d, opts))
        else:
            hist = build_two_level(d, opts, force=self.mode == "two-level")
        return self._store(hist)

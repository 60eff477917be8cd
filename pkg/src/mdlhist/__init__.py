"""Irregular histograms selected by the G-Enum minimum description length criterion.

The standard builder optimizes interval bounds on a grid whose granularity is
chosen automatically. For data that no single grid can resolve (isolated
outliers, heavy tails, values clustered far below the range's resolution) a
two-level builder partitions the data on a logarithmic scale first and
stitches per-subset histograms together.
"""

__version__ = "0.1.0"

from .conditioning import ConditioningReport, analyze, effective_epsilon_bins, is_ich, is_pich, is_rich
from .criterion import CostBreakdown, HistogramModel, enum_cost, genum_cost, level, null_cost
from .dataset import DataSet, from_values, read_dataset
from .estimator import GEnumHistogram, TwoLevelHistogram
from .optimizer import BuildOptions, BuildResult, build_standard
from .twolevel import GlobalHistogram, build_two_level

__all__ = [
    "__version__",
    "DataSet",
    "from_values",
    "read_dataset",
    "HistogramModel",
    "CostBreakdown",
    "genum_cost",
    "enum_cost",
    "null_cost",
    "level",
    "BuildOptions",
    "BuildResult",
    "build_standard",
    "GlobalHistogram",
    "build_two_level",
    "ConditioningReport",
    "analyze",
    "effective_epsilon_bins",
    "is_ich",
    "is_rich",
    "is_pich",
    "GEnumHistogram",
    "TwoLevelHistogram",
]

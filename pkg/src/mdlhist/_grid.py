"""Mapping between data values and equal-width bins of the extended domain.

The extended domain is ``[min - eps/2, max + eps/2]`` with ``eps = (max - min)/E``.
Values are first normalized to ``u = (x - min) / (max - min)`` so that the
bin assignment depends on ``u`` alone; any exact affine copy of a dataset
therefore gets exactly the same bin indices.
"""

import numpy as np


def normalized(values, vmin, vrange):
    return (np.asarray(values, dtype=np.float64) - vmin) / vrange


def bin_indices(values, vmin, vrange, E, bins):
    """Index in ``[0, bins)`` of each value's bin."""
    values = np.asarray(values, dtype=np.float64)
    if bins == 1 or vrange == 0.0:
        return np.zeros(values.shape, dtype=np.int64)
    u = normalized(values, vmin, vrange)
    t = (u * E + 0.5) / (E + 1.0)
    idx = np.floor(t * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    return idx


def grid_bounds(positions, bins, vmin, vrange, E):
    """Value-domain location of bin edges given as integer positions in ``[0, bins]``."""
    frac = np.asarray(positions, dtype=np.float64) / bins
    beta = (frac * (E + 1.0) - 0.5) / E
    return vmin + vrange * beta


def runs(idx):
    """Start offsets of runs of equal consecutive entries in a sorted index array."""
    if idx.size == 0:
        return np.empty(0, dtype=np.int64)
    change = np.flatnonzero(idx[1:] != idx[:-1]) + 1
    return np.concatenate(([0], change)).astype(np.int64)

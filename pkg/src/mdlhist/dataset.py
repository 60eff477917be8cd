"""Canonical (value, frequency) representation of univariate samples."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    EmptyInputError,
    EmptyRangeError,
    InvalidArgumentsError,
    NonFiniteValueError,
    ParseError,
)

__all__ = ["DataSet", "from_values", "read_dataset", "parse_dataset"]

FORMATS = ("values", "value-freq")


@dataclass(frozen=True, eq=False)
class DataSet:
    """Sorted distinct values with their positive integer frequencies.

    Instances are immutable: both arrays are flagged read-only. Build them
    with :meth:`from_values` or :meth:`from_pairs` rather than directly.
    """

    values: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        freqs = np.asarray(self.freqs, dtype=np.int64)
        if values.ndim != 1 or values.shape != freqs.shape:
            raise InvalidArgumentsError("values and freqs must be 1-D arrays of equal length")
        if values.size == 0:
            raise EmptyInputError("a DataSet needs at least one entry")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise InvalidArgumentsError("values must be strictly increasing")
        if np.any(freqs < 1):
            raise InvalidArgumentsError("frequencies must be positive")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFiniteValueError(int(bad[0]), float(values[bad[0]]))
        if values.flags.writeable:
            values = values.copy()
        if freqs.flags.writeable:
            freqs = freqs.copy()
        values.flags.writeable = False
        freqs.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "_n", int(freqs.sum()))

    @classmethod
    def from_values(cls, values) -> "DataSet":
        """Coalesce raw observations into a canonical DataSet."""
        arr = np.asarray(values, dtype=np.float64).ravel()
        if arr.size == 0:
            raise EmptyInputError("no values given")
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NonFiniteValueError(int(bad[0]), float(arr[bad[0]]))
        uniq, counts = np.unique(arr, return_counts=True)
        return cls(uniq, counts.astype(np.int64))

    @classmethod
    def from_pairs(cls, values, freqs) -> "DataSet":
        """Build from (value, frequency) pairs in any order, merging duplicates."""
        v = np.asarray(values, dtype=np.float64).ravel()
        f = np.asarray(freqs, dtype=np.int64).ravel()
        if v.size == 0:
            raise EmptyInputError("no values given")
        if v.shape != f.shape:
            raise InvalidArgumentsError("values and freqs differ in length")
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise NonFiniteValueError(int(bad[0]), float(v[bad[0]]))
        if np.any(f < 1):
            raise InvalidArgumentsError("frequencies must be positive")
        uniq, inverse = np.unique(v, return_inverse=True)
        summed = np.zeros(uniq.size, dtype=np.int64)
        np.add.at(summed, inverse, f)
        return cls(uniq, summed)

    @property
    def n(self) -> int:
        return self._n

    @property
    def min_value(self) -> float:
        return float(self.values[0])

    @property
    def max_value(self) -> float:
        return float(self.values[-1])

    @property
    def distinct_count(self) -> int:
        return int(self.values.size)

    @property
    def is_degenerate(self) -> bool:
        return self.values.size == 1

    @property
    def entries(self):
        return list(zip(self.values.tolist(), self.freqs.tolist()))

    def __len__(self):
        return self.distinct_count

    def __eq__(self, other):
        if not isinstance(other, DataSet):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(self.freqs, other.freqs)

    def __hash__(self):
        return hash((self.values.tobytes(), self.freqs.tobytes()))

    def __repr__(self):
        return f"DataSet(n={self.n}, distinct={self.distinct_count}, range=[{self.min_value!r}, {self.max_value!r}])"

    def expand(self) -> np.ndarray:
        """Replicate each value by its frequency."""
        return np.repeat(self.values, self.freqs)

    def take(self, start: int, stop: int) -> "DataSet":
        """Sub-DataSet made of entries ``start:stop`` (entry indices, not values)."""
        if not 0 <= start < stop <= self.distinct_count:
            raise EmptyRangeError(f"entry range [{start}, {stop}) is empty or out of bounds")
        return DataSet(self.values[start:stop], self.freqs[start:stop])

    def slice(self, lo: float, hi: float, lo_inclusive: bool = False) -> "DataSet":
        """Entries with values in ``]lo, hi]`` (``[lo, hi]`` if ``lo_inclusive``)."""
        if not lo < hi:
            raise InvalidArgumentsError("slice needs lo < hi")
        start = int(np.searchsorted(self.values, lo, side="left" if lo_inclusive else "right"))
        stop = int(np.searchsorted(self.values, hi, side="right"))
        if start >= stop:
            raise EmptyRangeError(f"no entries in range ({lo!r}, {hi!r}]")
        return self.take(start, stop)


def from_values(values) -> DataSet:
    return DataSet.from_values(values)


def _data_lines(lines):
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line


def _parse_float(number, line, text):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(number, line, "not a decimal number") from None
    if not np.isfinite(value):
        raise ParseError(number, line, "non-finite value")
    return value


def parse_dataset(lines, fmt: str = "values") -> DataSet:
    """Parse an iterable of text lines in the ``values`` or ``value-freq`` format."""
    if fmt not in FORMATS:
        raise InvalidArgumentsError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    values, freqs = [], []
    for number, line in _data_lines(lines):
        if fmt == "values":
            values.append(_parse_float(number, line, line))
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(number, line, "expected 'value,frequency'")
        values.append(_parse_float(number, line, parts[0].strip()))
        try:
            freq = int(parts[1].strip())
        except ValueError:
            raise ParseError(number, line, "frequency is not an integer") from None
        if freq < 1:
            raise ParseError(number, line, "frequency must be positive")
        freqs.append(freq)
    if not values:
        raise EmptyInputError("input holds no data lines")
    if fmt == "values":
        return DataSet.from_values(values)
    return DataSet.from_pairs(values, freqs)


def read_dataset(path, fmt: str = "values") -> DataSet:
    if isinstance(path, (str, os.PathLike)):
        with open(path, "r", encoding="utf-8") as fh:
            return parse_dataset(fh, fmt)
    if isinstance(path, io.IOBase):
        return parse_dataset(path, fmt)
    raise InvalidArgumentsError(f"cannot read a dataset from {type(path).__name__}")

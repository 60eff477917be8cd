"""Logarithmic transforms extended to zero and negative floating-point values.

``log_cr`` maps every double to a signed log scale anchored at the smallest
normal magnitude. ``log_dataset_cr`` anchors each sign branch at the
dataset's own smallest magnitude and offsets it by the branch's smallest
positive log gap, so that zero, the negative and the positive values all
stay separated without leaving a large hole around zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import DataSet
from .exceptions import EmptyInputError, NonFiniteInputError, OutOfDomainError

__all__ = ["EPS_D", "DOUBLE_MIN", "LogMapping", "log_cr", "log_dataset_cr", "invert_bound"]

EPS_D = 2e-16
DOUBLE_MIN = 1e-308
_LOG_DOUBLE_MIN = math.log(DOUBLE_MIN)
_LOG_DOUBLE_MAX = math.log(np.finfo(np.float64).max)
_SMALLEST_SUBNORMAL = math.ulp(0.0)


def log_cr(x):
    """Signed log of a double: ``eps_d + ln|x| - ln(1e-308)`` with the sign of x; 0 at 0."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError("log_cr needs finite input")
    mag = np.where(arr == 0.0, 1.0, np.abs(arr))
    body = EPS_D + (np.log(mag) - _LOG_DOUBLE_MIN)
    out = np.where(arr == 0.0, 0.0, np.sign(arr) * body)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LogMapping:
    """Parameters of the dataset-adapted transform.

    Positive values map to ``pos_shift + ln x - ln pos_ref`` and negative ones
    to ``-(neg_shift + ln(-x) - ln neg_ref)``; zero maps to zero.
    """

    neg_shift: float
    pos_shift: float
    neg_ref: float
    pos_ref: float
    has_neg: bool
    has_zero: bool
    has_pos: bool
    anchor_images: np.ndarray = field(default=None, repr=False, compare=False)
    anchor_values: np.ndarray = field(default=None, repr=False, compare=False)

    def _branch(self, positive: bool):
        if positive and self.has_pos or not positive and not self.has_neg and self.has_pos:
            return self.pos_shift, self.pos_ref
        if self.has_neg:
            return self.neg_shift, self.neg_ref
        return EPS_D, DOUBLE_MIN

    def forward(self, x):
        arr = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInputError("transform needs finite input")
        ps, pref = self._branch(True)
        ns, nref = self._branch(False)
        with np.errstate(divide="ignore"):
            mag = np.log(np.abs(arr))
        out = np.where(arr > 0, ps + (mag - math.log(pref)), 0.0)
        out = np.where(arr < 0, -(ns + (mag - math.log(nref))), out)
        return float(out) if out.ndim == 0 else out


def _branch_logs(mags):
    """Anchored logs of sorted magnitudes, coalesced, and the smallest positive gap."""
    logs = np.log(mags) - math.log(mags[0])
    distinct = np.unique(logs)
    if distinct.size >= 2:
        shift = float(np.min(np.diff(distinct)))
    else:
        shift = EPS_D
    return logs, shift


def log_dataset_cr(d: DataSet, return_index: bool = False):
    """Dataset-adapted signed log transform.

    Returns the transformed DataSet and its :class:`LogMapping`. Distinct
    inputs whose logs round to the same double are coalesced; with
    ``return_index`` the position of each input entry in the output is
    returned as a third value.
    """
    if d is None or d.n == 0:
        raise EmptyInputError("cannot transform an empty dataset")
    v = d.values
    neg = v < 0
    pos = v > 0
    out = np.zeros(v.size, dtype=np.float64)
    neg_shift = pos_shift = EPS_D
    neg_ref = pos_ref = DOUBLE_MIN
    if pos.any():
        mags = v[pos]
        logs, pos_shift = _branch_logs(mags)
        pos_ref = float(mags[0])
        out[pos] = pos_shift + logs
    if neg.any():
        mags = -v[neg][::-1]
        logs, neg_shift = _branch_logs(mags)
        neg_ref = float(mags[0])
        out[neg] = -(neg_shift + logs)[::-1]
    mapping = LogMapping(
        neg_shift=neg_shift,
        pos_shift=pos_shift,
        neg_ref=neg_ref,
        pos_ref=pos_ref,
        has_neg=bool(neg.any()),
        has_zero=bool((v == 0).any()),
        has_pos=bool(pos.any()),
    )
    uniq, inverse = np.unique(out, return_inverse=True)
    # Inputs sharing an image form a contiguous group. Anchor each image at
    # the group member the bit search would pick (the largest on the
    # positive side, the smallest on the negative side) so that bounds
    # landing on an image invert exactly.
    group_start = np.r_[0, np.flatnonzero(np.diff(inverse)) + 1]
    group_end = np.r_[group_start[1:], v.size] - 1
    anchors = np.where(uniq > 0, v[group_end], v[group_start])
    object.__setattr__(mapping, "anchor_images", uniq)
    object.__setattr__(mapping, "anchor_values", anchors)
    freqs = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(freqs, inverse, d.freqs)
    logd = DataSet(uniq, freqs)
    if return_index:
        return logd, mapping, inverse.astype(np.int64)
    return logd, mapping


def _bits_search(y, positive, m: LogMapping, guess):
    # Largest double x on the branch with forward(x) <= y (positive branch)
    # or smallest with forward(x) >= y (negative branch), searched on the
    # ordered bit patterns of positive doubles around the closed-form guess.
    def f(mag):
        return m.forward(mag if positive else -mag)

    lo = np.float64(guess) * (1 - 1e-6)
    hi = np.float64(guess) * (1 + 1e-6)
    target_ok = (lambda val: val <= y) if positive else (lambda val: val >= y)
    while not target_ok(f(lo)) and lo > 0:
        lo = lo / 2
    while target_ok(f(hi)) and math.isfinite(hi * 2):
        hi = hi * 2
    a = int(np.float64(lo).view(np.int64))
    b = int(np.float64(hi).view(np.int64))
    while b - a > 1:
        mid = (a + b) // 2
        if target_ok(f(np.int64(mid).view(np.float64))):
            a = mid
        else:
            b = mid
    return float(np.int64(a).view(np.float64))


def invert_bound(y: float, m: LogMapping) -> float:
    """Initial-domain value whose transform is ``y`` (to the resolution of the transform).

    Uses the closed-form exponential, then settles on the double at the top
    of the set of inputs that share the image ``y`` so that inverting the
    image of any value never lands above that value's plateau.
    """
    if not math.isfinite(y):
        raise OutOfDomainError(f"cannot invert non-finite bound {y!r}")
    if y == 0.0:
        return 0.0
    if m.anchor_images is not None:
        j = int(np.searchsorted(m.anchor_images, y))
        if j < m.anchor_images.size and m.anchor_images[j] == y:
            return float(m.anchor_values[j])
    positive = y > 0
    shift, ref = m._branch(positive)
    log_mag = abs(y) - shift + math.log(ref)
    if log_mag > _LOG_DOUBLE_MAX:
        raise OutOfDomainError(f"bound {y!r} maps outside the representable range")
    guess = math.exp(log_mag)
    if guess == 0.0:
        # below every nonzero double of this sign: the closest one to zero
        x = _SMALLEST_SUBNORMAL
    else:
        x = _bits_search(y, positive, m, guess)
    return x if positive else -x

"""Reproducible synthetic samples and closed-form collision thresholds.

Random streams come from PCG64 seeded through ``SeedSequence``; uniform
variates are built directly from the generator's raw 64-bit output and
Gaussian variates by inverse CDF, so a (spec, seed) pair yields the same
sample on every platform and NumPy version that ships PCG64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import ndtri

from .dataset import DataSet
from .exceptions import InvalidArgumentsError, InvalidNError, InvalidSpecError

__all__ = [
    "KINDS",
    "GeneratorSpec",
    "stream",
    "uniforms",
    "sample",
    "generate",
    "binomial_mixture_components",
    "expected_min_gap_uniform",
    "ich_threshold_uniform",
    "ich_threshold_gaussian",
    "birthday_threshold",
    "gaussian_granular_length_approx",
]

KINDS = ("uniform", "gaussian", "gaussian_mixture", "binomial_mixture")
_TWO_POW_M53 = 2.0**-53

# sub-stream indices within one (spec, seed) draw
_MAIN, _COMPONENT, _OUTLIER = 0, 1, 2


def stream(seed: int, index: int = 0) -> np.random.PCG64:
    """Independent PCG64 stream number ``index`` derived from ``seed``."""
    return np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def uniforms(bitgen: np.random.PCG64, size: int) -> np.ndarray:
    """Uniform variates on the open interval (0, 1) from the top 53 raw bits."""
    raw = bitgen.random_raw(size)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_M53


def _gaussians(bitgen, mu, sigma, size):
    return mu + sigma * ndtri(uniforms(bitgen, size))


def binomial_mixture_components(m: int = 20, sigma: float = 0.25):
    """``m + 1`` components with weights C(m, i) / 2**m, means i and a common sigma."""
    return [(math.comb(m, i) / 2.0**m, float(i), float(sigma)) for i in range(m + 1)]


@dataclass(frozen=True)
class GeneratorSpec:
    """Description of a synthetic sample.

    ``params`` depends on ``kind``: ``low``/``high`` for uniform, ``mu``/``sigma``
    for gaussian, ``components`` (list of ``[weight, mu, sigma]``) for
    gaussian_mixture, and ``m``/``sigma`` for binomial_mixture. ``outliers``
    is either ``{"count": c, "value": v}`` or ``{"count": c, "mu": m, "sigma": s}``.
    """

    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)
    outliers: Optional[dict] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 1:
            raise InvalidSpecError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) or self.seed < 0:
            raise InvalidSpecError(f"seed must be an unsigned integer, got {self.seed!r}")
        self.components()
        if self.outliers is not None:
            self._outlier_fields()

    def components(self):
        """Mixture components ``(weight, mu, sigma)`` for the Gaussian kinds."""
        p = self.params
        try:
            if self.kind == "uniform":
                low, high = float(p.get("low", 0.0)), float(p.get("high", 1.0))
                if not (math.isfinite(low) and math.isfinite(high) and low < high):
                    raise InvalidSpecError("uniform needs finite low < high")
                return None
            if self.kind == "gaussian":
                comps = [(1.0, float(p.get("mu", 0.0)), float(p.get("sigma", 1.0)))]
            elif self.kind == "gaussian_mixture":
                comps = [tuple(float(v) for v in c) for c in p["components"]]
            else:
                m = int(p.get("m", 20))
                if m < 0:
                    raise InvalidSpecError("binomial_mixture needs m >= 0")
                comps = binomial_mixture_components(m, float(p.get("sigma", 0.25)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpecError(f"malformed params for {self.kind}: {exc}") from None
        if not comps or any(len(c) != 3 for c in comps):
            raise InvalidSpecError("components must be non-empty [weight, mu, sigma] triples")
        weights = [c[0] for c in comps]
        if any(not w >= 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
            raise InvalidSpecError("mixture weights must be nonnegative and sum to 1")
        if any(not (c[2] > 0 and math.isfinite(c[2]) and math.isfinite(c[1])) for c in comps):
            raise InvalidSpecError("every component needs a finite mu and sigma > 0")
        return comps

    def _outlier_fields(self):
        o = self.outliers
        try:
            count = int(o["count"])
            if count < 0:
                raise InvalidSpecError("outlier count must be nonnegative")
            if "value" in o:
                value = float(o["value"])
                if not math.isfinite(value):
                    raise InvalidSpecError("outlier value must be finite")
                return count, value, None
            mu, sigma = float(o["mu"]), float(o["sigma"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpecError(f"malformed outliers: {exc}") from None
        if not (math.isfinite(mu) and sigma > 0 and math.isfinite(sigma)):
            raise InvalidSpecError("outlier distribution needs finite mu and sigma > 0")
        return count, mu, sigma

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(self.kind, self.n, seed, dict(self.params), self.outliers)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": int(self.n), "seed": int(self.seed), "params": dict(self.params)}
        if self.outliers is not None:
            out["outliers"] = dict(self.outliers)
        return out

    @classmethod
    def from_dict(cls, doc) -> "GeneratorSpec":
        if not isinstance(doc, dict):
            raise InvalidSpecError("a generator spec must be a JSON object")
        unknown = set(doc) - {"kind", "n", "seed", "params", "outliers"}
        if unknown:
            raise InvalidSpecError(f"unknown spec fields: {sorted(unknown)}")
        if "kind" not in doc or "n" not in doc:
            raise InvalidSpecError("spec needs 'kind' and 'n'")
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise InvalidSpecError("'params' must be an object")
        return cls(doc["kind"], doc["n"], doc.get("seed", 0), params, doc.get("outliers"))


def sample(spec: GeneratorSpec) -> np.ndarray:
    """Raw draw of ``spec.n`` values followed by the outliers, in generation order."""
    main = stream(spec.seed, _MAIN)
    n = int(spec.n)
    comps = spec.components()
    if comps is None:
        low, high = float(spec.params.get("low", 0.0)), float(spec.params.get("high", 1.0))
        values = low + (high - low) * uniforms(main, n)
    elif len(comps) == 1:
        values = _gaussians(main, comps[0][1], comps[0][2], n)
    else:
        cum = np.cumsum([c[0] for c in comps])
        cum /= cum[-1]
        which = np.searchsorted(cum, uniforms(stream(spec.seed, _COMPONENT), n), side="right")
        np.minimum(which, len(comps) - 1, out=which)
        mus = np.array([c[1] for c in comps])[which]
        sigmas = np.array([c[2] for c in comps])[which]
        values = mus + sigmas * ndtri(uniforms(main, n))
    if spec.outliers is not None:
        count, center, sigma = spec._outlier_fields()
        if sigma is None:
            extra = np.full(count, center)
        else:
            extra = _gaussians(stream(spec.seed, _OUTLIER), center, sigma, count)
        values = np.concatenate([values, extra])
    return values


def generate(spec: GeneratorSpec) -> DataSet:
    return DataSet.from_values(sample(spec))


def _check_E(E):
    if not E >= 2:
        raise InvalidArgumentsError(f"threshold needs E >= 2, got {E!r}")


def expected_min_gap_uniform(n: int) -> float:
    """Expected smallest gap between n uniform points on [0, 1]."""
    if int(n) != n or n < 2:
        raise InvalidNError(f"need n >= 2, got {n!r}")
    return 1.0 / (n * n - 1.0)


def ich_threshold_uniform(E: float) -> float:
    """Sample size at which the expected uniform min gap reaches one eps-bin."""
    _check_E(E)
    return math.sqrt(E)


def _gaussian_lhs(n):
    return n * math.sqrt(1.0 + 1.0 / math.log2(n))


def ich_threshold_gaussian(E: float) -> float:
    """Root of ``n sqrt(1 + 1/log2 n) = sqrt(pi/2) sqrt(E)`` on the increasing branch."""
    _check_E(E)
    target = math.sqrt(math.pi / 2) * math.sqrt(E)
    turn = minimize_scalar(_gaussian_lhs, bounds=(1.0 + 1e-9, 64.0), method="bounded", options={"xatol": 1e-12}).x
    if _gaussian_lhs(turn) >= target:
        return float(turn)
    hi = 2.0 * target
    return float(brentq(lambda n: _gaussian_lhs(n) - target, turn, hi, xtol=1e-12, rtol=1e-14))


def birthday_threshold(E: float) -> float:
    """Sample size for a 50% chance that two of n uniform draws share one of E bins."""
    _check_E(E)
    return 0.5 + math.sqrt(0.25 + 2.0 * math.log(2.0) * E)


def gaussian_granular_length_approx(n: int):
    """Range, precision and granular length of a standardized binomial proxy for a Gaussian sample."""
    if int(n) != n or n < 4:
        raise InvalidNError(f"need n >= 4, got {n!r}")
    b = math.log2(n)
    rng = 2.0 * (b + 1.0) / math.sqrt(b)
    pr = math.pi * math.sqrt(b) / n**2
    gr = (2.0 / math.pi) * (1.0 + 1.0 / b) * n**2
    return rng, pr, gr

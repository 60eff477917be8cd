"""Desk-scale sweeps comparing standard and two-level histograms on synthetic data."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from .conditioning import is_pich
from .optimizer import BuildOptions, build_standard
from .synthlab import GeneratorSpec, generate
from .twolevel import build_two_level

__all__ = ["Experiment", "EXPERIMENTS", "run_experiment", "run_repetition", "pich_detection_rate", "CSV_COLUMNS"]


@dataclass(frozen=True)
class Experiment:
    name: str
    parameter: str
    exponents: range
    default_reps: int
    make_spec: Callable[[int, int, Optional[int]], GeneratorSpec]
    value: Callable[[int], float]


def _one_outlier(i, seed, n):
    return GeneratorSpec("gaussian", n or 10_000, seed, {"mu": 1.0, "sigma": 0.1}, {"count": 1, "value": 2.0**i})


def _outlier_dist(i, seed, n):
    outliers = {"count": 100, "mu": 1.0, "sigma": 2.0**i * 1e-10}
    return GeneratorSpec("gaussian", n or 10_000, seed, {"mu": 1.0, "sigma": 0.1}, outliers)


def _heavy_tail(i, seed, n):
    mu2 = 2.0**i
    comps = [[0.5, 1.0, 0.1], [0.5, mu2, mu2 / 10]]
    return GeneratorSpec("gaussian_mixture", n or 20_000, seed, {"components": comps})


def _scalability(i, seed, n):
    return GeneratorSpec("binomial_mixture", 2**i, seed, {"m": 20, "sigma": 0.25})


EXPERIMENTS: Dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment("one-outlier", "v_out", range(0, 35), 20, _one_outlier, lambda i: 2.0**i),
        Experiment("outlier-dist", "sigma_o", range(0, 68), 20, _outlier_dist, lambda i: 2.0**i * 1e-10),
        Experiment("heavy-tail", "mu2", range(0, 35), 20, _heavy_tail, lambda i: 2.0**i),
        Experiment("scalability", "n", range(1, 21), 1, _scalability, lambda i: float(2**i)),
    )
}

CSV_COLUMNS = [
    "parameter",
    "exponent",
    "value",
    "reps",
    "k_standard_mean",
    "k_standard_std",
    "k_two_level_mean",
    "k_two_level_std",
    "subsets_mean",
    "subsets_std",
    "two_level_fraction",
    "seconds_standard_mean",
    "seconds_two_level_mean",
]


def run_repetition(name: str, exponent: int, seed: int, n: Optional[int] = None, early_stop: bool = False) -> dict:
    """Build both histograms for one generated dataset; timings exclude generation."""
    exp = EXPERIMENTS[name]
    d = generate(exp.make_spec(exponent, seed, n))
    opts = BuildOptions(early_stop=early_stop)
    t0 = time.perf_counter()
    std = build_standard(d, opts)
    t1 = time.perf_counter()
    two = build_two_level(d, opts)
    t2 = time.perf_counter()
    return {
        "k_standard": std.model.K,
        "k_two_level": two.K,
        "subsets": two.subset_count,
        "triggered": two.two_level_triggered,
        "seconds_standard": t1 - t0,
        "seconds_two_level": t2 - t1,
    }


def _task(args):
    return run_repetition(*args)


def _summary(values):
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def run_experiment(
    name: str,
    reps: Optional[int] = None,
    seed: int = 0,
    exponents=None,
    n: Optional[int] = None,
    early_stop: bool = False,
    workers: int = 1,
) -> List[dict]:
    """One summary row per swept exponent; repetition ``r`` uses seed ``seed + r``."""
    exp = EXPERIMENTS[name]
    reps = exp.default_reps if reps is None else int(reps)
    exponents = list(exp.exponents if exponents is None else exponents)
    tasks = [(name, i, seed + r, n, early_stop) for i in exponents for r in range(reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    rows = []
    for j, i in enumerate(exponents):
        chunk = results[j * reps : (j + 1) * reps]
        ks_mean, ks_std = _summary([r["k_standard"] for r in chunk])
        kt_mean, kt_std = _summary([r["k_two_level"] for r in chunk])
        sub_mean, sub_std = _summary([r["subsets"] for r in chunk])
        rows.append(
            {
                "parameter": exp.parameter,
                "exponent": i,
                "value": exp.value(i),
                "reps": reps,
                "k_standard_mean": ks_mean,
                "k_standard_std": ks_std,
                "k_two_level_mean": kt_mean,
                "k_two_level_std": kt_std,
                "subsets_mean": sub_mean,
                "subsets_std": sub_std,
                "two_level_fraction": float(np.mean([r["triggered"] for r in chunk])),
                "seconds_standard_mean": float(np.mean([r["seconds_standard"] for r in chunk])),
                "seconds_two_level_mean": float(np.mean([r["seconds_two_level"] for r in chunk])),
            }
        )
    return rows


def pich_detection_rate(n: int, reps: int = 200, seed: int = 0, E: int = 10**9) -> float:
    """Fraction of uniform samples of size ``n`` on [0, 1] flagged PICH at ``E`` eps-bins."""
    hits = 0
    for r in range(reps):
        d = generate(GeneratorSpec("uniform", int(n), seed + r))
        hits += bool(is_pich(d, E))
    return hits / reps

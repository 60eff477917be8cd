"""Command-line interface: ``mdlhist {build,analyze,generate,experiment}``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

from . import __version__
from .conditioning import analyze
from .criterion import level, null_cost
from .dataset import FORMATS, parse_dataset
from .exceptions import EmptyInputError, HistogramError, InvariantViolationError
from .experiments import CSV_COLUMNS, EXPERIMENTS, run_experiment
from .optimizer import BuildOptions, build_standard
from .synthlab import GeneratorSpec, sample
from .twolevel import build_two_level, from_standard

__all__ = ["main", "RunManifest"]

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_INTERNAL = 0, 2, 3, 4


@dataclass
class RunManifest:
    command: str
    options: dict
    input_digest: str
    tool_version: str
    elapsed_seconds: float

    def write(self, artifact_path: str):
        with open(artifact_path + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _load(path: str, fmt: str):
    raw = _read_bytes(path)
    return parse_dataset(raw.decode("utf-8").splitlines(), fmt), _digest(raw)


def _emit_json(doc, path):
    text = json.dumps(doc, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _options_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


def _manifest(args, digest, elapsed, path):
    if path in (None, "-"):
        return
    RunManifest(args.command, _options_dict(args), digest, __version__, elapsed).write(path)


def cmd_build(args) -> int:
    d, digest = _load(args.input, args.format)
    opts = BuildOptions(e_max=args.e_max, early_stop=args.early_stop, force_E=args.force_E)
    start = time.perf_counter()
    if args.mode == "standard":
        hist = from_standard(d, build_standard(d, opts))
    else:
        hist = build_two_level(d, opts, force=args.mode == "two-level")
    hist.validate()
    elapsed = time.perf_counter() - start
    doc = {"mode": args.mode, **hist.to_dict()}
    res = hist.standard
    if res is not None:
        doc["granularity"] = int(res.granularity)
        doc["E"] = int(res.model.E)
        doc["cost"] = res.cost.as_dict()
        doc["level"] = level(res.cost.total, null_cost(d.n, res.model.E))
    _emit_json(doc, args.output)
    if args.plot:
        with open(args.plot, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lower", "upper", "count", "density"])
            for iv in hist.intervals:
                writer.writerow([repr(float(iv.lower)), repr(float(iv.upper)), int(iv.count), repr(float(iv.density))])
    _manifest(args, digest, elapsed, args.output)
    return EXIT_OK


def cmd_analyze(args) -> int:
    d, digest = _load(args.input, args.format)
    start = time.perf_counter()
    report = analyze(d, args.e_max)
    elapsed = time.perf_counter() - start
    _emit_json(report.as_dict(), args.output)
    _manifest(args, digest, elapsed, args.output)
    return EXIT_OK


def cmd_generate(args) -> int:
    raw = _read_bytes(args.spec)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise _InputError(f"spec is not valid JSON: {exc}") from None
    spec = GeneratorSpec.from_dict(doc)
    start = time.perf_counter()
    values = sample(spec)
    text = "".join(repr(float(v)) + "\n" for v in values)
    elapsed = time.perf_counter() - start
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    _manifest(args, _digest(raw), elapsed, args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    exp = EXPERIMENTS[args.name]
    lo = exp.exponents.start if args.min_exp is None else args.min_exp
    hi = exp.exponents.stop - 1 if args.max_exp is None else args.max_exp
    if lo > hi:
        raise _InputError(f"empty exponent range [{lo}, {hi}]")
    start = time.perf_counter()
    rows = run_experiment(
        args.name,
        reps=args.reps,
        seed=args.seed,
        exponents=range(lo, hi + 1),
        n=args.n,
        early_stop=args.early_stop,
        workers=args.workers,
    )
    elapsed = time.perf_counter() - start
    os.makedirs(args.output_dir, exist_ok=True)
    path = os.path.join(args.output_dir, f"{args.name}.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    _manifest(args, _digest(json.dumps(_options_dict(args), sort_keys=True).encode()), elapsed, path)
    return EXIT_OK


class _InputError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdlhist", description="MDL irregular histograms with outlier-robust two-level construction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("input", help="data file, or '-' for standard input")
        p.add_argument("--format", choices=FORMATS, default="values")
        p.add_argument("--e-max", type=_positive_int, default=10**9, help="maximum number of eps-bins")
        p.add_argument("--output", "-o", default="-", help="JSON output path (default: standard output)")

    p = sub.add_parser("build", help="build a histogram and write it as JSON")
    data_args(p)
    p.add_argument("--mode", choices=("auto", "standard", "two-level"), default="auto")
    p.add_argument("--early-stop", action="store_true", help="stop the granularity search early")
    p.add_argument("--force-E", type=_positive_int, default=None, help="fixed number of eps-bins")
    p.add_argument("--plot", default=None, help="also write lower,upper,count,density CSV here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("analyze", help="report conditioning diagnostics as JSON")
    data_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="draw a synthetic sample from a JSON spec")
    p.add_argument("spec", help="generator spec JSON file")
    p.add_argument("output", nargs="?", default="-", help="values file (default: standard output)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="run a parameter sweep and write a summary CSV")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--reps", type=_positive_int, default=None, help="repetitions per setting (default 20; 1 for scalability)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=_positive_int, default=None, help="main sample size (not used by scalability)")
    p.add_argument("--min-exp", type=int, default=None, help="first exponent of the sweep")
    p.add_argument("--max-exp", type=int, default=None, help="last exponent of the sweep")
    p.add_argument("--early-stop", action="store_true")
    p.add_argument("--workers", type=_positive_int, default=1, help="parallel processes over repetitions")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyInputError as exc:
        print(f"mdlhist: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except InvariantViolationError as exc:
        print(f"mdlhist: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (HistogramError, _InputError, OSError, UnicodeDecodeError) as exc:
        print(f"mdlhist: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands:

* ``test``  -- run one shape test on a count file and write a JSON report;
* ``study`` -- run a Monte Carlo study from a JSON config, write the CSV
  table plus a JSON manifest;
* ``draws`` -- export the calibration draw set of a test setup as CSV;
* ``pmf``   -- print the empirical p.m.f. and its differences; optionally
  write a frequency file that re-ingests to the identical p.m.f.

Exit codes: 0 success, 2 bad input (files, formats, arguments, data too short),
3 numerical failure (non-convergence, covariance repair).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .harness import StudyConfig, run_study, write_manifest, write_study_csv
from .limits import save_draws_csv
from .pmf import CountSample, build_empirical_pmf, forward_difference
from .projections import NonConvergenceError
from .shape_tests import TestConfig, calibration_draws, run_configured_test

__all__ = ["main", "ingest", "build_report"]

SEED_ENV_VAR = "PMFSHAPE_SEED"


def ingest(path: str, fmt: str) -> CountSample:
    """Read a count file: one value per line (raw) or value,count lines (freq)."""
    if fmt not in ("raw", "freq"):
        raise ValueError(f"unknown input format {fmt!r}")
    values = []
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                if fmt == "raw":
                    values.append(int(text))
                else:
                    left, right = text.split(",")
                    pairs.append((int(left), int(right)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed {fmt} line {text!r}") from exc
    if fmt == "raw":
        if not values:
            raise ValueError(f"{path}: empty input")
        if min(values) < 0:
            raise ValueError(f"{path}: negative count value")
        return CountSample.from_values(values)
    if not pairs:
        raise ValueError(f"{path}: empty input")
    if any(v < 0 for v, _ in pairs):
        raise ValueError(f"{path}: negative count value")
    if any(c < 0 for _, c in pairs):
        raise ValueError(f"{path}: negative frequency")
    return CountSample.from_frequencies(pairs)


def _sig6(value):
    """Round floats to 6 significant digits, recursively."""
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {k: _sig6(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sig6(v) for v in value]
    return value


def build_report(sample: CountSample, cfg: TestConfig, result, path: str, fmt: str) -> dict:
    p_hat = build_empirical_pmf(sample)
    selection = None
    if result.selection is not None:
        selection = {
            "selected": list(result.selection.selected.members),
            "method_used": result.selection.method_used,
            "fell_back_m3": result.selection.fell_back_m3,
            "fell_back_m2": result.selection.fell_back_m2,
        }
    report = {
        "tool": {"name": "pmfshape", "version": __version__},
        "input": {
            "path": path,
            "format": fmt,
            "n": sample.n,
            "support": [p_hat.support_min, p_hat.support_max],
            "pmf": [float(x) for x in p_hat.probs],
        },
        "config": {
            "k": cfg.k,
            "method": cfg.method,
            "alpha": cfg.alpha,
            "draws": cfg.draws,
            "seed": cfg.seed,
            "gamma": cfg.gamma,
            "a_n": cfg.a_n,
            "c": cfg.c,
        },
        "result": {
            "statistic": result.statistic,
            "critical_value": result.critical_value,
            "p_value": result.p_value,
            "reject": result.reject,
            "tail": result.tail,
            "null_hypothesis": result.null_hypothesis,
            "selection": selection,
            "knots": list(result.knot_estimate.members) if result.knot_estimate else [],
            "degenerate_calibration": result.degenerate_calibration,
        },
        "timing_seconds": result.elapsed_seconds,
    }
    return _sig6(report)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def _add_test_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="count file to read")
    parser.add_argument("--format", choices=("raw", "freq"), default="raw")
    parser.add_argument("--k", type=int, default=1, help="difference degree (1=monotone, 2=convex)")
    parser.add_argument("--test", choices=("min", "proj"), default="min")
    parser.add_argument("--method", choices=("m1", "m2", "m3"), default="m3",
                        help="index selection for the min test")
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--draws", type=int, default=1000, help="calibration draws")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)")
    parser.add_argument("--gamma", type=float, default=None, help="m3 quantile order, default 1/n")
    parser.add_argument("--a-n", type=float, default=None, dest="a_n", help="m2 threshold scale")
    parser.add_argument("--c", type=float, default=1.0, help="m2 threshold divisor")


def _config_from_args(args) -> TestConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    method = "proj" if args.test == "proj" else args.method
    return TestConfig(
        k=args.k,
        method=method,
        alpha=args.alpha,
        draws=args.draws,
        seed=seed,
        gamma=args.gamma,
        a_n=args.a_n,
        c=args.c,
    )


def _cmd_test(args) -> int:
    sample = ingest(args.input, args.format)
    cfg = _config_from_args(args)
    result = run_configured_test(sample, cfg)
    report = build_report(sample, cfg, result, args.input, args.format)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_draws(args) -> int:
    sample = ingest(args.input, args.format)
    cfg = _config_from_args(args)
    draws = calibration_draws(sample, cfg)
    save_draws_csv(draws, args.out)
    return 0


def _cmd_study(args) -> int:
    with open(args.config) as fh:
        cfg = StudyConfig.from_dict(json.load(fh))
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    started = time.perf_counter()
    rows = run_study(cfg)
    write_study_csv(rows, args.out)
    manifest_path = args.manifest or (str(args.out) + ".manifest.json")
    write_manifest(cfg, rows, manifest_path, extra={"total_seconds": time.perf_counter() - started})
    return 0


def _cmd_pmf(args) -> int:
    sample = ingest(args.input, args.format)
    p_hat = build_empirical_pmf(sample)
    k = args.k
    diffs = forward_difference(p_hat, k) if len(p_hat) > k else None
    counts = p_hat.counts
    sys.stdout.write(f"value,count,prob,diff{k}\n")
    for off in range(len(p_hat)):
        j = p_hat.support_min + off
        diff = "" if diffs is None or off >= diffs.size else f"{diffs[off]:.6g}"
        sys.stdout.write(f"{j},{int(counts[off])},{p_hat.probs[off]:.6g},{diff}\n")
    if args.out:
        with open(args.out, "w") as fh:
            for off in range(len(p_hat)):
                if counts[off]:
                    fh.write(f"{p_hat.support_min + off},{int(counts[off])}\n")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmfshape",
                                     description="Shape tests for count distributions")
    parser.add_argument("--version", action="version", version=f"pmfshape {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one shape test, emit a JSON report")
    _add_test_options(p_test)
    p_test.add_argument("--out", default=None, help="report path (default: stdout)")
    p_test.set_defaults(func=_cmd_test)

    p_draws = sub.add_parser("draws", help="export calibration draws as CSV")
    _add_test_options(p_draws)
    p_draws.add_argument("--out", required=True, help="CSV path for the draws")
    p_draws.set_defaults(func=_cmd_draws)

    p_study = sub.add_parser("study", help="run a Monte Carlo study from a JSON config")
    p_study.add_argument("--config", required=True, help="study config JSON")
    p_study.add_argument("--out", required=True, help="CSV table output path")
    p_study.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")
    p_study.add_argument("--workers", type=int, default=None, help="override worker count")
    p_study.set_defaults(func=_cmd_study)

    p_pmf = sub.add_parser("pmf", help="print the empirical p.m.f. and differences")
    p_pmf.add_argument("--input", required=True)
    p_pmf.add_argument("--format", choices=("raw", "freq"), default="raw")
    p_pmf.add_argument("--k", type=int, default=1)
    p_pmf.add_argument("--out", default=None, help="write a re-ingestable frequency file")
    p_pmf.set_defaults(func=_cmd_pmf)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (NonConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"pmfshape: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"pmfshape: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo study harness: rejection-rate tables, knot-recovery curves, bootstrap draws.

Replication r of a study derives all of its randomness from
``SeedSequence(base_seed + r)`` (one child stream for the data, one for the
calibration draws), so results are bit-identical across runs and independent
of how replications are distributed over workers.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec, parse_spec, pmf, sample_iid, spec_label
from .limits import DrawSet
from .pmf import CountSample, argmin_set, build_empirical_pmf, forward_difference, forward_difference_vector
from .knots import select_method3
from .shape_tests import TestConfig, run_configured_test

__all__ = [
    "Scenario",
    "StudyConfig",
    "StudyRow",
    "run_study",
    "write_study_csv",
    "write_manifest",
    "bootstrap_min_distribution",
    "knot_consistency_curve",
    "TEST_IDS",
]

#: study test ids: i/ii/iii are the min-difference tests under selection
#: methods m1/m2/m3, iv is the projection-distance test
TEST_IDS = ("i", "ii", "iii", "iv")
_TEST_TO_METHOD = {"i": "m1", "ii": "m2", "iii": "m3", "iv": "proj"}


@dataclass(frozen=True)
class Scenario:
    dist: DistributionSpec
    n: int
    k: int
    test: str

    def __post_init__(self):
        if self.test not in TEST_IDS:
            raise ValueError(f"unknown test id {self.test!r}; expected one of {TEST_IDS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def label(self) -> str:
        return spec_label(self.dist)


@dataclass(frozen=True)
class StudyConfig:
    scenarios: tuple[Scenario, ...]
    replications: int = 1000
    draws: int = 1000
    alpha: float = 0.05
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if not self.scenarios:
            raise ValueError("study needs at least one scenario")
        if self.replications < 1:
            raise ValueError("need at least one replication")

    @classmethod
    def from_dict(cls, raw: dict) -> "StudyConfig":
        scenarios = tuple(
            Scenario(dist=parse_spec(s["dist"]), n=int(s["n"]), k=int(s["k"]), test=str(s["test"]))
            for s in raw["scenarios"]
        )
        return cls(
            scenarios=scenarios,
            replications=int(raw.get("replications", 1000)),
            draws=int(raw.get("draws", 1000)),
            alpha=float(raw.get("alpha", 0.05)),
            seed=int(raw.get("seed", 0)),
            workers=int(raw.get("workers", 1)),
        )

    def to_dict(self) -> dict:
        return {
            "scenarios": [
                {"dist": s.label, "n": s.n, "k": s.k, "test": s.test} for s in self.scenarios
            ],
            "replications": self.replications,
            "draws": self.draws,
            "alpha": self.alpha,
            "seed": self.seed,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class StudyRow:
    model: str
    n: int
    k: int
    test: str
    rejection_pct: float
    mc_se_pct: float
    replications: int
    errors: int
    seconds: float


def _replicate(scenario: Scenario, alpha: float, draws: int, base_seed: int, rep: int) -> bool:
    root = np.random.SeedSequence(base_seed + rep)
    data_stream, calib_stream = root.spawn(2)
    sample = sample_iid(scenario.dist, scenario.n, data_stream)
    calib_seed = int(calib_stream.generate_state(1)[0])
    cfg = TestConfig(
        k=scenario.k,
        method=_TEST_TO_METHOD[scenario.test],
        alpha=alpha,
        draws=draws,
        seed=calib_seed,
    )
    return run_configured_test(sample, cfg).reject


def _replicate_batch(args) -> tuple[int, int]:
    scenario, alpha, draws, base_seed, reps = args
    rejects = errors = 0
    for rep in reps:
        try:
            rejects += _replicate(scenario, alpha, draws, base_seed, rep)
        except Exception:
            errors += 1
    return rejects, errors


def run_study(cfg: StudyConfig, strict: bool = False) -> list[StudyRow]:
    """Rejection percentages per scenario over seeded replications.

    Replications that raise are counted in ``errors`` and excluded from the
    percentage; with ``strict=True`` any error aborts the run instead.
    """
    rows = []
    for scenario in cfg.scenarios:
        started = time.perf_counter()
        rep_ids = list(range(cfg.replications))
        if cfg.workers > 1:
            chunks = [rep_ids[i :: 4 * cfg.workers] for i in range(4 * cfg.workers)]
            args = [(scenario, cfg.alpha, cfg.draws, cfg.seed, chunk) for chunk in chunks if chunk]
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                parts = list(pool.map(_replicate_batch, args))
            rejects = sum(p[0] for p in parts)
            errors = sum(p[1] for p in parts)
        else:
            rejects, errors = _replicate_batch((scenario, cfg.alpha, cfg.draws, cfg.seed, rep_ids))
        if strict and errors:
            raise RuntimeError(f"{errors} replication(s) failed for scenario {scenario}")
        valid = cfg.replications - errors
        frac = rejects / valid if valid else float("nan")
        se = float(np.sqrt(frac * (1.0 - frac) / valid)) if valid else float("nan")
        rows.append(
            StudyRow(
                model=scenario.label,
                n=scenario.n,
                k=scenario.k,
                test=scenario.test,
                rejection_pct=100.0 * frac,
                mc_se_pct=100.0 * se,
                replications=cfg.replications,
                errors=errors,
                seconds=time.perf_counter() - started,
            )
        )
    return rows


def write_study_csv(rows: list[StudyRow], path) -> None:
    """Wide table: one row per (model, n, k), one rejection column per test."""
    groups: dict[tuple[str, int, int], dict[str, StudyRow]] = {}
    for row in rows:
        groups.setdefault((row.model, row.n, row.k), {})[row.test] = row
    header = ["model", "n", "k"]
    for test in TEST_IDS:
        header += [f"{test}_pct", f"{test}_se"]
    header.append("errors")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for (model, n, k), by_test in groups.items():
            record = [model, n, k]
            for test in TEST_IDS:
                row = by_test.get(test)
                record += ["", ""] if row is None else [f"{row.rejection_pct:.6g}", f"{row.mc_se_pct:.6g}"]
            record.append(sum(r.errors for r in by_test.values()))
            writer.writerow(record)


def write_manifest(cfg: StudyConfig, rows: list[StudyRow], path, extra: dict | None = None) -> None:
    """JSON run manifest: config, environment, and per-row timings."""
    payload = {
        "config": cfg.to_dict(),
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "rows": [
            {
                "model": r.model,
                "n": r.n,
                "k": r.k,
                "test": r.test,
                "rejection_pct": r.rejection_pct,
                "mc_se_pct": r.mc_se_pct,
                "replications": r.replications,
                "errors": r.errors,
                "seconds": r.seconds,
            }
            for r in rows
        ],
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def bootstrap_min_distribution(sample: CountSample, k: int, b_boot: int, seed: int) -> DrawSet:
    """Resampled-minus-observed draws of the min-difference statistic.

    Each draw resamples n observations from the empirical p.m.f. and records
    ``sqrt(n)`` times the change of the minimum k-th difference.
    """
    if b_boot < 1:
        raise ValueError("need at least one bootstrap draw")
    p_hat = build_empirical_pmf(sample)
    base = forward_difference(p_hat, k).min()
    n = sample.n
    rng = np.random.default_rng(seed)
    draws = np.empty(b_boot)
    root_n = np.sqrt(n)
    for b in range(b_boot):
        counts = rng.multinomial(n, p_hat.probs)
        nz = np.nonzero(counts)[0]
        probs = counts[nz[0] : nz[-1] + 1] / n
        if probs.size < k + 1:
            raise ValueError(f"support too short for degree {k} in a resample")
        star = forward_difference_vector(probs, k).min()
        draws[b] = root_n * (star - base)
    return DrawSet(draws=draws, seed=seed, law_tag="bootstrap-min-difference")


def knot_consistency_curve(
    spec: DistributionSpec, k: int, n_grid: list[int], replications: int, seed: int
) -> list[tuple[int, float]]:
    """Per-n frequency with which the studentized selection recovers the exact
    minimizing index set of the model p.m.f."""
    target = set(argmin_set(pmf(spec), k).members)
    curve = []
    for grid_pos, n in enumerate(n_grid):
        hits = 0
        for rep in range(replications):
            stream = np.random.SeedSequence(seed + rep + 1_000_003 * grid_pos)
            sample = sample_iid(spec, n, stream)
            p_hat = build_empirical_pmf(sample)
            try:
                outcome = select_method3(p_hat, k)
            except ValueError:
                continue
            if outcome.method_used == "m3" and set(outcome.selected.members) == target:
                hits += 1
        curve.append((n, hits / replications))
    return curve

"""The four test families, assembled end to end.

Min-difference tests reject for small values of ``sqrt(n)`` times the minimum
signed k-th difference of the empirical p.m.f., with the critical value read
off Monte Carlo draws of the Gaussian-minimum law over a selected index set
(methods m1/m2/m3).  Projection tests reject for large values of ``sqrt(n)``
times the distance to the monotone (k=1) or convex (k=2) fit, calibrated by
blockwise-projected Gaussian draws whose blocks come from the studentized
knot estimate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .covariance import covariance_convex, covariance_general, covariance_monotone, limit_cov_multinomial
from .knots import SelectionOutcome, _method3_members, select
from .limits import (
    DrawSet,
    empirical_quantile,
    p_value,
    sample_convex_limit,
    sample_grenander_limit,
    sample_min_statistic,
)
from .pmf import CountSample, DiffSupport, EmpiricalPmf, IndexSet, build_empirical_pmf, forward_difference
from .projections import convex_lse, grenander

__all__ = ["TestConfig", "TestResult", "test_k_monotone_min", "test_monotone_projection", "test_convex_projection", "run_configured_test", "calibration_draws"]

#: projection statistics at or below this are treated as exactly zero
ZERO_STAT_TOL = 1e-10


@dataclass(frozen=True)
class TestConfig:
    """Knobs shared by all tests; defaults follow the simulation study setup."""

    k: int = 1
    method: str = "m3"  # m1 | m2 | m3 for min tests, ignored by projection tests
    alpha: float = 0.05
    draws: int = 1000
    seed: int = 0
    gamma: float | None = None  # m3 quantile order, default 1/n
    a_n: float | None = None    # m2 threshold scale, default n**(-1/|support|)
    c: float = 1.0              # m2 threshold divisor

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.draws < 1:
            raise ValueError("need at least one calibration draw")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    tail: str                       # which side of the critical value rejects
    null_hypothesis: str
    selection: SelectionOutcome | None
    knot_estimate: IndexSet | None
    degenerate_calibration: bool
    n: int
    support_min: int
    support_max: int
    k: int
    method: str
    alpha: float
    seed: int
    elapsed_seconds: float


def _covariance_for(p_hat: EmpiricalPmf, k: int):
    if k == 1:
        return covariance_monotone(p_hat)
    if k == 2:
        return covariance_convex(p_hat)
    return covariance_general(p_hat, k)


def test_k_monotone_min(sample: CountSample, cfg: TestConfig) -> TestResult:
    """Lower-tail test built on the minimum signed k-th difference."""
    started = time.perf_counter()
    if cfg.method not in ("m1", "m2", "m3"):
        raise ValueError(f"min-difference test expects method m1/m2/m3, got {cfg.method!r}")
    p_hat = build_empirical_pmf(sample)
    n = sample.n
    statistic = float(np.sqrt(n) * forward_difference(p_hat, cfg.k).min())
    selection = select(p_hat, cfg.k, cfg.method, gamma=cfg.gamma, a_n=cfg.a_n, c=cfg.c)
    cov = _covariance_for(p_hat, cfg.k)
    draws = sample_min_statistic(cov, selection.selected, cfg.draws, cfg.seed)
    critical = empirical_quantile(draws, cfg.alpha)
    pval = p_value(draws, statistic, "lower")
    null = "min k-th difference = 0" if cfg.method == "m3" else "min k-th difference >= 0"
    return TestResult(
        statistic=statistic,
        critical_value=critical,
        p_value=pval,
        reject=statistic < critical,
        tail="lower",
        null_hypothesis=null,
        selection=selection,
        knot_estimate=selection.selected.complement(),
        degenerate_calibration=False,
        n=n,
        support_min=p_hat.support_min,
        support_max=p_hat.support_max,
        k=cfg.k,
        method=cfg.method,
        alpha=cfg.alpha,
        seed=cfg.seed,
        elapsed_seconds=time.perf_counter() - started,
    )


def _estimate_knots(p_hat: EmpiricalPmf, k: int, gamma: float | None) -> tuple[IndexSet, bool]:
    """Knots for projection calibration: complement of the studentized selection.

    An empty selection suggests a strictly shaped p.m.f.; every index is then
    treated as a knot, which makes the calibration law degenerate at zero (the
    caller flags this).
    """
    support = DiffSupport.of(p_hat, k)
    members = _method3_members(p_hat, k, gamma)
    if not members:
        full = IndexSet(parent=support, members=tuple(range(support.lo, support.hi + 1)))
        return full, True
    selected = IndexSet(parent=support, members=members)
    return selected.complement(), False


def _projection_test(sample: CountSample, cfg: TestConfig, k: int) -> TestResult:
    started = time.perf_counter()
    p_hat = build_empirical_pmf(sample)
    if len(p_hat) < k + 1:
        raise ValueError(f"support too short for degree {k}")
    n = sample.n
    if k == 1:
        fit = grenander(p_hat.probs, support_min=p_hat.support_min)
        sampler = sample_grenander_limit
        null = "non-increasing p.m.f."
    else:
        fit = convex_lse(p_hat.probs, support_min=p_hat.support_min)
        sampler = sample_convex_limit
        null = "convex p.m.f."
    statistic = float(np.sqrt(n) * fit.objective)
    if statistic <= ZERO_STAT_TOL:
        statistic = 0.0
    knots, degenerate = _estimate_knots(p_hat, k, cfg.gamma)
    gamma_cov = limit_cov_multinomial(p_hat)
    draws = sampler(gamma_cov, knots, cfg.draws, cfg.seed)
    critical = empirical_quantile(draws, 1.0 - cfg.alpha)
    pval = p_value(draws, statistic, "upper")
    return TestResult(
        statistic=statistic,
        critical_value=critical,
        p_value=pval,
        reject=statistic > critical,
        tail="upper",
        null_hypothesis=null,
        selection=None,
        knot_estimate=knots,
        degenerate_calibration=degenerate,
        n=n,
        support_min=p_hat.support_min,
        support_max=p_hat.support_max,
        k=k,
        method="proj",
        alpha=cfg.alpha,
        seed=cfg.seed,
        elapsed_seconds=time.perf_counter() - started,
    )


def test_monotone_projection(sample: CountSample, cfg: TestConfig) -> TestResult:
    """Upper-tail test on the distance to the monotone fit."""
    return _projection_test(sample, cfg, 1)


def test_convex_projection(sample: CountSample, cfg: TestConfig) -> TestResult:
    """Upper-tail test on the distance to the convex fit."""
    return _projection_test(sample, cfg, 2)


def run_configured_test(sample: CountSample, cfg: TestConfig) -> TestResult:
    """Route a config to the matching test family."""
    if cfg.method == "proj":
        if cfg.k == 1:
            return test_monotone_projection(sample, cfg)
        if cfg.k == 2:
            return test_convex_projection(sample, cfg)
        raise ValueError("projection tests are defined for k in {1, 2}")
    return test_k_monotone_min(sample, cfg)


def calibration_draws(sample: CountSample, cfg: TestConfig) -> DrawSet:
    """The Monte Carlo draw set a test with this config would calibrate against."""
    p_hat = build_empirical_pmf(sample)
    if cfg.method == "proj":
        if cfg.k not in (1, 2):
            raise ValueError("projection tests are defined for k in {1, 2}")
        knots, _ = _estimate_knots(p_hat, cfg.k, cfg.gamma)
        sampler = sample_grenander_limit if cfg.k == 1 else sample_convex_limit
        return sampler(limit_cov_multinomial(p_hat), knots, cfg.draws, cfg.seed)
    selection = select(p_hat, cfg.k, cfg.method, gamma=cfg.gamma, a_n=cfg.a_n, c=cfg.c)
    cov = _covariance_for(p_hat, cfg.k)
    return sample_min_statistic(cov, selection.selected, cfg.draws, cfg.seed)


def with_seed(cfg: TestConfig, seed: int) -> TestConfig:
    return replace(cfg, seed=seed)

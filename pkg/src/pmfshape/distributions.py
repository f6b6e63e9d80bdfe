"""Parametric count families for the simulation harness.

Truncated Poisson and binomial laws (restricted and renormalized to an
integer window) give the null and alternative models; mixtures of triangular
p.m.f.s ``T_r(i) = 2 (r - i)_+ / (r (r + 1))`` give convex models with knots
wherever a mixture weight is positive.  Probabilities are computed in log
space before normalizing, and sampling inverts the exact c.d.f.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammaln

from .pmf import CountSample, EmpiricalPmf, forward_difference_vector

__all__ = [
    "TruncatedPoisson",
    "TruncatedBinomial",
    "TriangularMixture",
    "ExplicitPmf",
    "DistributionSpec",
    "ShapeFlags",
    "pmf",
    "classify",
    "sample_iid",
    "parse_spec",
    "spec_label",
]

#: float guard for exact boundary cases (e.g. a curvature that is 0 in exact arithmetic)
CLASSIFY_TOL = 1e-12


@dataclass(frozen=True)
class TruncatedPoisson:
    support_min: int
    support_max: int
    rate: float

    def __post_init__(self):
        if self.support_min < 0 or self.support_max < self.support_min:
            raise ValueError("need 0 <= support_min <= support_max")
        if not self.rate > 0:
            raise ValueError("rate must be positive")


@dataclass(frozen=True)
class TruncatedBinomial:
    support_min: int
    support_max: int
    trials: int
    success_prob: float

    def __post_init__(self):
        if self.support_min < 0 or self.support_max < self.support_min:
            raise ValueError("need 0 <= support_min <= support_max")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 < self.success_prob < 1.0:
            raise ValueError("success probability must lie in (0, 1)")
        if self.support_min > self.trials:
            raise ValueError("window lies beyond the binomial support")


@dataclass(frozen=True)
class TriangularMixture:
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise ValueError("mixture needs at least one weight")
        if any(w < 0 for w in weights):
            raise ValueError("mixture weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")


@dataclass(frozen=True)
class ExplicitPmf:
    """A fixed p.m.f. given as relative weights on a contiguous support."""

    support_min: int
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if self.support_min < 0:
            raise ValueError("support_min must be non-negative")
        if not weights or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValueError("weights must be non-negative with positive total")


DistributionSpec = Union[TruncatedPoisson, TruncatedBinomial, TriangularMixture, ExplicitPmf]


@dataclass(frozen=True)
class ShapeFlags:
    monotone: bool  # non-increasing on the support
    convex: bool


def _triangular(r: int, length: int) -> np.ndarray:
    i = np.arange(length, dtype=np.float64)
    return 2.0 * np.maximum(r - i, 0.0) / (r * (r + 1.0))


def pmf(spec: DistributionSpec) -> EmpiricalPmf:
    """Exact normalized p.m.f.; the support is trimmed tight."""
    if isinstance(spec, TruncatedPoisson):
        j = np.arange(spec.support_min, spec.support_max + 1, dtype=np.float64)
        logw = j * np.log(spec.rate) - gammaln(j + 1.0)
        probs = np.exp(logw - logw.max())
        probs /= probs.sum()
        return EmpiricalPmf.from_probs(spec.support_min, probs)
    if isinstance(spec, TruncatedBinomial):
        top = min(spec.support_max, spec.trials)
        j = np.arange(spec.support_min, top + 1, dtype=np.float64)
        r, q = spec.trials, spec.success_prob
        logw = (
            gammaln(r + 1.0)
            - gammaln(j + 1.0)
            - gammaln(r - j + 1.0)
            + j * np.log(q)
            + (r - j) * np.log1p(-q)
        )
        probs = np.exp(logw - logw.max())
        probs /= probs.sum()
        return EmpiricalPmf.from_probs(spec.support_min, probs)
    if isinstance(spec, TriangularMixture):
        length = len(spec.weights)
        probs = np.zeros(length)
        for r, w in enumerate(spec.weights, start=1):
            if w > 0:
                probs += w * _triangular(r, length)
        probs /= probs.sum()
        return EmpiricalPmf.from_probs(0, probs)
    if isinstance(spec, ExplicitPmf):
        probs = np.asarray(spec.weights, dtype=np.float64)
        return EmpiricalPmf.from_probs(spec.support_min, probs / probs.sum())
    raise TypeError(f"unknown distribution spec {type(spec).__name__}")


def classify(spec: DistributionSpec) -> ShapeFlags:
    """Sign classification of the slope and curvature minima of the exact p.m.f."""
    probs = pmf(spec).probs
    monotone = True if probs.size < 2 else bool(forward_difference_vector(probs, 1).min() >= -CLASSIFY_TOL)
    convex = True if probs.size < 3 else bool(forward_difference_vector(probs, 2).min() >= -CLASSIFY_TOL)
    return ShapeFlags(monotone=monotone, convex=convex)


def sample_iid(spec: DistributionSpec, n: int, seed) -> CountSample:
    """n i.i.d. draws by inverse-c.d.f. lookup on the exact probabilities."""
    if n < 1:
        raise ValueError("need at least one draw")
    exact = pmf(spec)
    cum = np.cumsum(exact.probs)
    cum[-1] = 1.0
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cum, rng.random(n), side="right")
    return CountSample.from_values(exact.support_min + idx)


def parse_spec(text: str) -> DistributionSpec:
    """Parse CLI spec strings: tpois:m:M:rate, tbinom:m:M:trials:q, tmix:w1,w2,... or tmix:WxK."""
    parts = text.strip().split(":")
    family = parts[0].lower()
    try:
        if family == "tpois":
            if len(parts) != 4:
                raise ValueError
            return TruncatedPoisson(int(parts[1]), int(parts[2]), float(parts[3]))
        if family == "tbinom":
            if len(parts) != 5:
                raise ValueError
            return TruncatedBinomial(int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4]))
        if family == "tmix":
            if len(parts) != 2:
                raise ValueError
            body = parts[1]
            if "x" in body and "," not in body:
                w, k = body.split("x")
                weights = (float(w),) * int(k)
            else:
                weights = tuple(float(w) for w in body.split(","))
            return TriangularMixture(weights)
        if family == "vec":
            if len(parts) != 3:
                raise ValueError
            return ExplicitPmf(int(parts[1]), tuple(float(w) for w in parts[2].split(",")))
    except ValueError as exc:
        raise ValueError(f"malformed distribution spec {text!r}") from exc
    raise ValueError(f"unknown distribution family in {text!r}")


def spec_label(spec: DistributionSpec) -> str:
    """Round-trippable label in the CLI syntax."""
    if isinstance(spec, TruncatedPoisson):
        return f"tpois:{spec.support_min}:{spec.support_max}:{spec.rate:g}"
    if isinstance(spec, TruncatedBinomial):
        return f"tbinom:{spec.support_min}:{spec.support_max}:{spec.trials}:{spec.success_prob:g}"
    if isinstance(spec, TriangularMixture):
        return "tmix:" + ",".join(f"{w:g}" for w in spec.weights)
    if isinstance(spec, ExplicitPmf):
        return f"vec:{spec.support_min}:" + ",".join(f"{w:g}" for w in spec.weights)
    raise TypeError(f"unknown distribution spec {type(spec).__name__}")

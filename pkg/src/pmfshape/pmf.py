"""Empirical p.m.f.s on contiguous integer supports and their forward differences.

The raw material of every test in this package: a sample of counts is turned
into a normalized frequency vector on the tight support ``{m, ..., M}``, and
shape constraints are expressed through the signed k-th forward difference

    diff_k(p)(j) = sum_{i=0}^{k} (-1)^i C(k, i) p(j + i),   j = m, ..., M - k.

``diff_1`` returns the negated slopes (non-negative iff non-increasing) and
``diff_2`` the curvature (non-negative iff convex).  A p.m.f. is k-monotone
exactly when the minimum of this vector is >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

__all__ = [
    "CountSample",
    "EmpiricalPmf",
    "DiffSupport",
    "IndexSet",
    "build_empirical_pmf",
    "forward_difference",
    "forward_difference_vector",
    "difference_matrix",
    "min_difference",
    "argmin_set",
    "is_k_monotone",
]

#: tolerance used for exact-tie detection on probabilities that are rationals
#: with denominator n; safe well beyond n ~ 1e9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class CountSample:
    """A sample of non-negative integer observations, stored as a frequency table.

    ``values`` holds the distinct observed values (sorted) and ``counts`` how
    often each occurred; large frequency files are never materialized into
    one entry per observation.
    """

    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)
        if values.ndim != 1 or values.shape != counts.shape:
            raise ValueError("values and counts must be 1-D arrays of equal length")
        if values.size == 0 or counts.sum() == 0:
            raise ValueError("empty sample")
        if np.any(values < 0):
            raise ValueError("negative count value in sample")
        if np.any(counts < 0):
            raise ValueError("negative frequency in sample")
        if np.any(np.diff(values) <= 0):
            raise ValueError("values must be distinct and sorted")

    @classmethod
    def from_values(cls, raw) -> "CountSample":
        """Build from raw (unsorted, repeated) observations."""
        raw = np.asarray(raw, dtype=np.int64)
        if raw.size == 0:
            raise ValueError("empty sample")
        values, counts = np.unique(raw, return_counts=True)
        return cls(values=values, counts=counts)

    @classmethod
    def from_frequencies(cls, pairs) -> "CountSample":
        """Build from (value, count) pairs; zero-count rows are dropped."""
        pairs = [(int(v), int(c)) for v, c in pairs]
        agg: dict[int, int] = {}
        for v, c in pairs:
            agg[v] = agg.get(v, 0) + c
        kept = sorted((v, c) for v, c in agg.items() if c > 0)
        if not kept:
            raise ValueError("empty sample")
        values = np.array([v for v, _ in kept], dtype=np.int64)
        counts = np.array([c for _, c in kept], dtype=np.int64)
        return cls(values=values, counts=counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def min(self) -> int:
        return int(self.values[0])

    @property
    def max(self) -> int:
        return int(self.values[-1])


@dataclass(frozen=True)
class EmpiricalPmf:
    """Normalized frequencies on the tight contiguous support {m, ..., M}.

    The support is tight (first and last probabilities strictly positive);
    interior zeros are preserved.  When built from a sample the integer
    counts are kept alongside so the exact frequencies can be re-derived.
    """

    support_min: int
    probs: np.ndarray
    n: int | None = None
    counts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-D vector")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if probs[0] <= 0.0 or probs[-1] <= 0.0:
            raise ValueError("support must be tight (positive mass at both ends)")
        if self.counts is not None:
            counts = np.asarray(self.counts, dtype=np.int64)
            object.__setattr__(self, "counts", counts)
            if counts.shape != probs.shape:
                raise ValueError("counts must align with probs")

    @classmethod
    def from_probs(cls, support_min: int, probs, n: int | None = None) -> "EmpiricalPmf":
        """Build from a probability vector, trimming leading/trailing zeros."""
        probs = np.asarray(probs, dtype=np.float64)
        nz = np.nonzero(probs > 0.0)[0]
        if nz.size == 0:
            raise ValueError("probability vector has no mass")
        lo, hi = int(nz[0]), int(nz[-1])
        return cls(support_min=support_min + lo, probs=probs[lo : hi + 1], n=n)

    @property
    def support_max(self) -> int:
        return self.support_min + self.probs.size - 1

    def __len__(self) -> int:
        return int(self.probs.size)

    def prob(self, j: int) -> float:
        """Probability at the absolute support point ``j`` (0 outside)."""
        off = j - self.support_min
        if off < 0 or off >= self.probs.size:
            return 0.0
        return float(self.probs[off])


@dataclass(frozen=True)
class DiffSupport:
    """The contiguous index set {m, ..., M - k} where degree-k differences live."""

    k: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("difference degree must be >= 1")
        if self.hi < self.lo:
            raise ValueError(f"support too short for degree {self.k}")

    @classmethod
    def of(cls, p: EmpiricalPmf, k: int) -> "DiffSupport":
        if k < 1:
            raise ValueError("difference degree must be >= 1")
        if len(p) < k + 1:
            raise ValueError(f"support too short for degree {k}")
        return cls(k=k, lo=p.support_min, hi=p.support_max - k)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, j: int) -> bool:
        return self.lo <= j <= self.hi


@dataclass(frozen=True)
class IndexSet:
    """A sorted subset of a :class:`DiffSupport`.

    May be empty; selection routines fall back through their method chain when
    it is, so consumers can rely on non-emptiness only after selection.
    """

    parent: DiffSupport
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(j) for j in self.members)
        object.__setattr__(self, "members", members)
        if any(b <= a for a, b in zip(members, members[1:])):
            raise ValueError("members must be strictly increasing")
        if any(j not in self.parent for j in members):
            raise ValueError("members must lie inside the parent difference support")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, j: int) -> bool:
        return int(j) in self.members

    @property
    def is_empty(self) -> bool:
        return not self.members

    def offsets(self) -> np.ndarray:
        """Members as 0-based offsets into the difference vector."""
        return np.asarray(self.members, dtype=np.int64) - self.parent.lo

    def complement(self) -> "IndexSet":
        missing = tuple(j for j in range(self.parent.lo, self.parent.hi + 1) if j not in self.members)
        return IndexSet(parent=self.parent, members=missing)


def build_empirical_pmf(sample: CountSample) -> EmpiricalPmf:
    """Empirical p.m.f. of a count sample on its tight support."""
    lo, hi = sample.min, sample.max
    counts = np.zeros(hi - lo + 1, dtype=np.int64)
    counts[sample.values - lo] = sample.counts
    n = sample.n
    return EmpiricalPmf(support_min=lo, probs=counts / n, n=n, counts=counts)


def forward_difference_vector(x, k: int) -> np.ndarray:
    """Signed k-th forward differences of a plain vector.

    Entry j is ``sum_i (-1)^i C(k,i) x[j+i]``; the sign convention makes the
    result non-negative on non-increasing (k=1) resp. convex (k=2) inputs.
    """
    x = np.asarray(x, dtype=np.float64)
    if k < 1:
        raise ValueError("difference degree must be >= 1")
    if x.size < k + 1:
        raise ValueError(f"support too short for degree {k}")
    out = np.zeros(x.size - k)
    for i in range(k + 1):
        coef = (-1) ** i * comb(k, i)
        out += coef * x[i : i + x.size - k]
    return out


def forward_difference(p: EmpiricalPmf, k: int) -> np.ndarray:
    """Signed k-th forward differences of a p.m.f. over its difference support."""
    return forward_difference_vector(p.probs, k)


def difference_matrix(k: int, length: int) -> np.ndarray:
    """Matrix D with (D x)_j = signed k-th forward difference of x at offset j."""
    if length < k + 1:
        raise ValueError(f"support too short for degree {k}")
    rows = length - k
    d = np.zeros((rows, length))
    for i in range(k + 1):
        coef = (-1) ** i * comb(k, i)
        d[np.arange(rows), np.arange(rows) + i] = coef
    return d


def min_difference(p: EmpiricalPmf, k: int) -> float:
    """Minimum signed k-th difference; >= 0 exactly when p is k-monotone."""
    return float(forward_difference(p, k).min())


def is_k_monotone(p: EmpiricalPmf, k: int, tol: float = TIE_TOL) -> bool:
    return min_difference(p, k) >= -tol


def argmin_set(p: EmpiricalPmf, k: int, tol: float = TIE_TOL) -> IndexSet:
    """Indices where the minimum k-th difference is attained (within ``tol``)."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    diffs = forward_difference(p, k)
    support = DiffSupport.of(p, k)
    lowest = diffs.min()
    members = tuple(int(j) for j in np.nonzero(diffs <= lowest + tol)[0] + support.lo)
    return IndexSet(parent=support, members=members)

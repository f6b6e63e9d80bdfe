"""Asymptotic covariance matrices for differenced empirical frequencies.

Everything here follows from indicator algebra: with Y_r the signed k-th
forward difference of the indicator family ``1{X = .}`` evaluated at support
point ``m + r``, the CLT limit of ``sqrt(n) * (diff_k(phat) - diff_k(p))`` is
centered Gaussian with Cov(Y_r, Y_s).  Products of indicators vanish unless
their support points coincide, which collapses every entry to a short sum of
probabilities; the k=1 and k=2 cases reduce to three- resp. five-band closed
forms that are implemented separately and cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .pmf import DiffSupport, EmpiricalPmf, forward_difference

__all__ = [
    "CovMatrix",
    "covariance_general",
    "covariance_monotone",
    "covariance_convex",
    "null_diag_variance",
    "limit_cov_multinomial",
]

#: eigenvalues this far below zero signal a formula bug, not roundoff
HARD_EIG_TOL = -1e-6


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric PSD matrix plus a factor L with L @ L.T ~= entries.

    Both covariance families used here are rank-deficient by construction, so
    the factor comes from an eigendecomposition with negative eigenvalues
    clamped to zero (a plain Cholesky factor does not exist).
    """

    entries: np.ndarray
    factor: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_entries(cls, entries) -> "CovMatrix":
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if not np.allclose(entries, entries.T, atol=1e-12, rtol=0.0):
            raise ValueError("covariance must be symmetric")
        sym = 0.5 * (entries + entries.T)
        eigvals, eigvecs = np.linalg.eigh(sym)
        if eigvals.min() < HARD_EIG_TOL:
            raise np.linalg.LinAlgError(
                f"covariance has eigenvalue {eigvals.min():.3e} below {HARD_EIG_TOL:.0e}; "
                "refusing to repair"
            )
        clamped = np.clip(eigvals, 0.0, None)
        factor = eigvecs * np.sqrt(clamped)
        return cls(entries=entries, factor=factor)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])


def covariance_general(p: EmpiricalPmf, k: int) -> CovMatrix:
    """Limit covariance of the degree-k difference vector, any k >= 1.

    Entry (r, s) is E[Y_r Y_s] - E[Y_r] E[Y_s] with the product expectation
    expanded over coinciding support points.
    """
    support = DiffSupport.of(p, k)
    probs = p.probs
    means = forward_difference(p, k)
    dim = len(support)
    weights = np.array([(-1) ** i * comb(k, i) for i in range(k + 1)])
    entries = np.empty((dim, dim))
    for r in range(dim):
        for s in range(r, dim):
            gap = s - r
            acc = 0.0
            if gap <= k:
                # indicator products survive only where m+r+i == m+s+l
                for l in range(0, k - gap + 1):
                    acc += weights[l + gap] * weights[l] * probs[s + l]
            val = acc - means[r] * means[s]
            entries[r, s] = val
            entries[s, r] = val
    return CovMatrix.from_entries(entries)


def covariance_monotone(p: EmpiricalPmf) -> CovMatrix:
    """Three-band closed form of :func:`covariance_general` for k=1."""
    support = DiffSupport.of(p, 1)
    probs = p.probs
    slopes = forward_difference(p, 1)
    dim = len(support)
    entries = -np.outer(slopes, slopes)
    for r in range(dim):
        entries[r, r] = probs[r + 1] + probs[r] - slopes[r] ** 2
        if r + 1 < dim:
            v = -probs[r + 1] - slopes[r] * slopes[r + 1]
            entries[r, r + 1] = v
            entries[r + 1, r] = v
    return CovMatrix.from_entries(entries)


def covariance_convex(p: EmpiricalPmf) -> CovMatrix:
    """Five-band closed form of :func:`covariance_general` for k=2."""
    support = DiffSupport.of(p, 2)
    probs = p.probs
    curvs = forward_difference(p, 2)
    dim = len(support)
    entries = -np.outer(curvs, curvs)
    for r in range(dim):
        entries[r, r] = probs[r + 2] + 4.0 * probs[r + 1] + probs[r] - curvs[r] ** 2
        if r + 1 < dim:
            v = -2.0 * (probs[r + 2] + probs[r + 1]) - curvs[r] * curvs[r + 1]
            entries[r, r + 1] = v
            entries[r + 1, r] = v
        if r + 2 < dim:
            v = probs[r + 2] - curvs[r] * curvs[r + 2]
            entries[r, r + 2] = v
            entries[r + 2, r] = v
    return CovMatrix.from_entries(entries)


def null_diag_variance(p_hat: EmpiricalPmf, j: int, k: int) -> float:
    """Variance of one studentized difference under the boundary null diff_k(p)(j) = 0.

    Setting the difference to zero turns the diagonal of the k=1 (resp. k=2)
    covariance into 2 p(j+1) (resp. 6 p(j+1)); only those two degrees admit
    this simplification.
    """
    if k not in (1, 2):
        raise ValueError("null-constrained variance is defined for k in {1, 2}")
    support = DiffSupport.of(p_hat, k)
    if j not in support:
        raise ValueError(f"index {j} outside difference support [{support.lo}, {support.hi}]")
    nxt = p_hat.prob(j + 1)
    if nxt <= 0.0:
        raise ValueError("degenerate null variance")
    return (2.0 if k == 1 else 6.0) * nxt


def limit_cov_multinomial(p: EmpiricalPmf) -> CovMatrix:
    """Covariance of sqrt(n) (phat - p): diag(p) - p p^T.  Rows sum to zero."""
    probs = p.probs
    entries = np.diag(probs) - np.outer(probs, probs)
    return CovMatrix.from_entries(entries)

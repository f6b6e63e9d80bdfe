"""Data-driven selection of the indices where a p.m.f. may attain its minimum difference.

Three selectors with a fixed fallback chain:

* ``m1`` keeps the whole difference support (always valid, conservative);
* ``m2`` keeps indices whose difference is at most ``a_n / c`` times the
  largest one, with defaults ``a_n = n ** (-1 / |support|)`` and ``c = 1``;
* ``m3`` keeps indices whose studentized difference stays below the Gaussian
  quantile ``z_{1-gamma}``, default ``gamma = 1/n``; the studentization uses
  the boundary-null variance (2 p(j+1) for slopes, 6 p(j+1) for curvatures).

Empty selections fall back ``m3 -> m2 -> m1``; the outcome records which
method finally produced the set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .covariance import null_diag_variance
from .pmf import DiffSupport, EmpiricalPmf, IndexSet, forward_difference

__all__ = ["SelectionOutcome", "select", "select_method1", "select_method2", "select_method3"]

METHODS = ("m1", "m2", "m3")


@dataclass(frozen=True)
class SelectionOutcome:
    selected: IndexSet
    method_used: str
    fell_back_m3: bool = False  # m3 came up empty, deferred to m2
    fell_back_m2: bool = False  # m2 came up empty, deferred to m1

    def __post_init__(self):
        if self.method_used not in METHODS:
            raise ValueError(f"unknown method {self.method_used!r}")
        if self.selected.is_empty:
            raise ValueError("selection outcome must be non-empty")


def _require_n(p_hat: EmpiricalPmf, what: str) -> int:
    if p_hat.n is None:
        raise ValueError(f"{what} needs the sample size; build the p.m.f. from a sample "
                         "or pass the tuning constant explicitly")
    return p_hat.n


def select_method1(p_hat: EmpiricalPmf, k: int) -> SelectionOutcome:
    """Keep every index of the difference support."""
    support = DiffSupport.of(p_hat, k)
    full = IndexSet(parent=support, members=tuple(range(support.lo, support.hi + 1)))
    return SelectionOutcome(selected=full, method_used="m1")


def _method2_members(p_hat: EmpiricalPmf, k: int, a_n: float | None, c: float) -> tuple[int, ...]:
    if c <= 0:
        raise ValueError("c must be positive")
    diffs = forward_difference(p_hat, k)
    if a_n is None:
        n = _require_n(p_hat, "the default a_n")
        a_n = float(n) ** (-1.0 / diffs.size)
    if a_n <= 0:
        raise ValueError("a_n must be positive")
    threshold = (a_n / c) * float(diffs.max())
    support = DiffSupport.of(p_hat, k)
    return tuple(int(j) + support.lo for j in np.nonzero(diffs <= threshold)[0])


def select_method2(
    p_hat: EmpiricalPmf, k: int, a_n: float | None = None, c: float = 1.0
) -> SelectionOutcome:
    """Relative-threshold selection; falls back to m1 when nothing qualifies."""
    members = _method2_members(p_hat, k, a_n, c)
    if not members:
        out = select_method1(p_hat, k)
        return SelectionOutcome(selected=out.selected, method_used="m1", fell_back_m2=True)
    support = DiffSupport.of(p_hat, k)
    return SelectionOutcome(selected=IndexSet(parent=support, members=members), method_used="m2")


def _method3_members(p_hat: EmpiricalPmf, k: int, gamma: float | None) -> tuple[int, ...]:
    if k not in (1, 2):
        raise ValueError("method m3 is defined for k in {1, 2}")
    if gamma is None:
        gamma = 1.0 / _require_n(p_hat, "the default gamma")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    n = _require_n(p_hat, "the studentized statistic")
    diffs = forward_difference(p_hat, k)
    support = DiffSupport.of(p_hat, k)
    z = float(ndtri(1.0 - gamma))
    members = []
    root_n = np.sqrt(n)
    for off, j in enumerate(range(support.lo, support.hi + 1)):
        try:
            var = null_diag_variance(p_hat, j, k)
        except ValueError:
            continue  # degenerate variance: index cannot be standardized
        if root_n * diffs[off] / np.sqrt(var) <= z:
            members.append(j)
    return tuple(members)


def select_method3(
    p_hat: EmpiricalPmf,
    k: int,
    gamma: float | None = None,
    a_n: float | None = None,
    c: float = 1.0,
) -> SelectionOutcome:
    """Studentized selection; falls back to m2, then m1, when empty."""
    members = _method3_members(p_hat, k, gamma)
    support = DiffSupport.of(p_hat, k)
    if members:
        return SelectionOutcome(selected=IndexSet(parent=support, members=members), method_used="m3")
    m2_members = _method2_members(p_hat, k, a_n, c)
    if m2_members:
        return SelectionOutcome(
            selected=IndexSet(parent=support, members=m2_members),
            method_used="m2",
            fell_back_m3=True,
        )
    out = select_method1(p_hat, k)
    return SelectionOutcome(
        selected=out.selected, method_used="m1", fell_back_m3=True, fell_back_m2=True
    )


def select(
    p_hat: EmpiricalPmf,
    k: int,
    method: str = "m3",
    *,
    gamma: float | None = None,
    a_n: float | None = None,
    c: float = 1.0,
) -> SelectionOutcome:
    """Dispatch to one of the selectors with its documented defaults."""
    if method == "m1":
        return select_method1(p_hat, k)
    if method == "m2":
        return select_method2(p_hat, k, a_n=a_n, c=c)
    if method == "m3":
        return select_method3(p_hat, k, gamma=gamma, a_n=a_n, c=c)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")

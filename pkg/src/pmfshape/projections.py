"""Least-squares projections onto shape-constrained cones.

Two engines are implemented:

* monotone (non-increasing) projection via the pool-adjacent-violators
  algorithm, with an independent construction through the least concave
  majorant of the cumulative sum diagram used as a cross-check;
* convex projection via support reduction on the kink basis
  ``{1, ramp, hinge_t}``: interior kinks are added where the double cumulative
  sum of the residual dips below the input's, and kinks whose weight (the
  fitted curvature) turns negative are removed along a feasibility line
  search.  The fixed point of that loop is exactly the envelope
  characterization checked by :func:`check_convex_lse_characterization`.

Projections preserve the total sum (and, for the convex engine, the first
moment), because the residual is orthogonal to the constant and ramp basis
columns.  Fitting a probability vector therefore yields a vector summing to
one without an explicit constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pmf import DiffSupport, IndexSet, forward_difference_vector

__all__ = [
    "NonConvergenceError",
    "ProjectionResult",
    "CumSumDiagram",
    "pava_nonincreasing",
    "lcm_left_slopes",
    "grenander",
    "convex_lse",
    "check_convex_lse_characterization",
    "project_monotone_block",
    "project_convex_block",
]

#: threshold for calling a fitted difference a knot / a constraint active
KNOT_TOL = 1e-10


class NonConvergenceError(RuntimeError):
    """An iterative projection exceeded its iteration cap."""


@dataclass(frozen=True)
class ProjectionResult:
    """A fitted shape-constrained vector plus bookkeeping.

    ``objective`` is the Euclidean distance between input and fit; ``knots``
    are the indices (on the difference support) where the fitted constraint
    is strictly slack, or None when the support is too short to carry any.
    """

    fitted: np.ndarray
    objective: float
    knots: IndexSet | None


def _knots_of(fitted: np.ndarray, k: int, support_min: int) -> IndexSet | None:
    if fitted.size < k + 1:
        return None
    diffs = forward_difference_vector(fitted, k)
    parent = DiffSupport(k=k, lo=support_min, hi=support_min + fitted.size - 1 - k)
    members = tuple(int(j) + support_min for j in np.nonzero(diffs > KNOT_TOL)[0])
    return IndexSet(parent=parent, members=members)


# ---------------------------------------------------------------------------
# monotone projection
# ---------------------------------------------------------------------------

def pava_nonincreasing(v) -> np.ndarray:
    """Euclidean projection onto non-increasing vectors.

    Left-to-right sweep with back-merging; blocks with equal pooled means are
    merged, so the block structure (not just the fit) is deterministic.
    """
    v = np.asarray(v, dtype=np.float64)
    sums: list[float] = []
    sizes: list[int] = []
    for x in v:
        s, c = float(x), 1
        # previous mean <= current mean violates strict decrease: pool
        while sums and sums[-1] * c <= s * sizes[-1]:
            s += sums.pop()
            c += sizes.pop()
        sums.append(s)
        sizes.append(c)
    return np.repeat([s / c for s, c in zip(sums, sizes)], sizes)


@dataclass(frozen=True)
class CumSumDiagram:
    """Partial-sum graph of a vector, anchored at height 0 one step left."""

    points: np.ndarray  # shape (len+1, 2); x ascending

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("diagram needs at least two (x, y) points")
        if pts[0, 1] != 0.0:
            raise ValueError("diagram must start at height 0")

    @classmethod
    def of(cls, v, support_min: int = 0) -> "CumSumDiagram":
        v = np.asarray(v, dtype=np.float64)
        xs = np.arange(support_min - 1, support_min + v.size)
        ys = np.concatenate([[0.0], np.cumsum(v)])
        return cls(points=np.column_stack([xs, ys]))

    @property
    def total(self) -> float:
        return float(self.points[-1, 1])


def lcm_left_slopes(diagram: CumSumDiagram) -> np.ndarray:
    """Left slopes of the least concave majorant of a cumulative sum diagram.

    Equals the monotone projection of the summed vector; kept as an
    independent implementation to cross-check the PAVA engine.
    """
    pts = diagram.points
    hull: list[np.ndarray] = []
    for pt in pts:
        # drop hull points that would make the majorant locally convex
        while len(hull) >= 2:
            ox, oy = hull[-2]
            ax, ay = hull[-1]
            if (ax - ox) * (pt[1] - oy) - (ay - oy) * (pt[0] - ox) >= 0.0:
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = np.empty(pts.shape[0] - 1)
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        a = int(round(x0 - pts[0, 0]))
        b = int(round(x1 - pts[0, 0]))
        slopes[a:b] = (y1 - y0) / (x1 - x0)
    return slopes


def grenander(v, support_min: int = 0) -> ProjectionResult:
    """Monotone (non-increasing) least-squares fit of a vector.

    The fit preserves the total sum; applied to an empirical p.m.f. it is the
    classical decreasing-density estimator on a discrete support.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("input must be a non-empty vector")
    fitted = pava_nonincreasing(v)
    return ProjectionResult(
        fitted=fitted,
        objective=float(np.linalg.norm(fitted - v)),
        knots=_knots_of(fitted, 1, support_min),
    )


def project_monotone_block(v) -> np.ndarray:
    """Plain non-increasing projection of an arbitrary real vector."""
    return pava_nonincreasing(v)


# ---------------------------------------------------------------------------
# convex projection (support reduction)
# ---------------------------------------------------------------------------

def _h_profile(x: np.ndarray) -> np.ndarray:
    """Double cumulative sums H(t) = sum_{i<t} F(i), t = 0..len-1, H(0) = 0."""
    f = np.cumsum(x)
    out = np.empty(x.size)
    out[0] = 0.0
    out[1:] = np.cumsum(f[:-1])
    return out


def _kink_basis(length: int, kinks: list[int]) -> np.ndarray:
    """Columns: constant, ramp, and one hinge per kink offset j (bend at j+1)."""
    ramp = np.arange(length, dtype=np.float64)
    cols = [np.ones(length), ramp]
    for j in kinks:
        cols.append(np.maximum(ramp - (j + 1), 0.0))
    return np.column_stack(cols)


def _convex_projection(v: np.ndarray, tol: float = KNOT_TOL, max_iter: int | None = None) -> np.ndarray:
    """Projection onto {second differences >= 0} via support reduction."""
    length = v.size
    if length <= 2:
        return v.astype(np.float64).copy()
    if max_iter is None:
        max_iter = 10 * (length - 1)

    kinks: list[int] = []          # active interior kink offsets, weights kept > 0
    weights = np.zeros(0)          # feasible kink weights matching `kinks`

    def solve(current: list[int]) -> tuple[np.ndarray, np.ndarray]:
        basis = _kink_basis(length, current)
        theta, *_ = np.linalg.lstsq(basis, v, rcond=None)
        return basis @ theta, theta[2:]

    fit, _ = solve(kinks)
    for _ in range(max_iter):
        h_gap = _h_profile(fit - v)
        worst = int(np.argmin(h_gap[1:])) + 1
        if h_gap[worst] >= -tol:
            return fit
        kinks.append(worst - 1)
        weights = np.append(weights, 0.0)

        # restore weight feasibility (Lawson-Hanson style line search)
        fit, cand = solve(kinks)
        while np.any(cand < -tol):
            blocking = np.nonzero(cand < -tol)[0]
            step = min(weights[i] / (weights[i] - cand[i]) for i in blocking)
            weights = weights + step * (cand - weights)
            keep = weights > tol
            kinks = [j for j, flag in zip(kinks, keep) if flag]
            weights = weights[keep]
            fit, cand = solve(kinks)
        weights = np.clip(cand, 0.0, None)
    raise NonConvergenceError("support reduction did not converge")


def project_convex_block(v) -> np.ndarray:
    """Projection of an arbitrary real vector onto convex sequences."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("input must be a non-empty vector")
    return _convex_projection(v)


def convex_lse(v, support_min: int = 0) -> ProjectionResult:
    """Convex least-squares fit of a probability vector on its support.

    The result is the closest vector (in Euclidean distance) with all second
    differences non-negative; it sums to one because the residual is
    orthogonal to constants.  Correctness is certified by
    :func:`check_convex_lse_characterization`.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 3:
        raise ValueError("convex fit needs a support of at least 3 points")
    if np.any(v < 0.0) or abs(float(v.sum()) - 1.0) > 1e-9:
        raise ValueError("input must be a probability vector")
    fitted = _convex_projection(v)
    return ProjectionResult(
        fitted=fitted,
        objective=float(np.linalg.norm(fitted - v)),
        knots=_knots_of(fitted, 2, support_min),
    )


def check_convex_lse_characterization(q, v, tol: float = KNOT_TOL) -> bool:
    """Envelope test: is ``q`` the convex least-squares fit of ``v``?

    Requires, with H the double partial sum: H_q >= H_v everywhere, equality
    at both support ends, and equality at every point where ``q`` bends
    (strictly positive second difference one step to the left).
    """
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if q.shape != v.shape or q.ndim != 1:
        raise ValueError("vectors must be 1-D with equal lengths")
    gap = _h_profile(q) - _h_profile(v)
    if np.any(gap < -tol):
        return False
    if abs(gap[0]) > tol or abs(gap[-1]) > tol:
        return False
    # H_q(M+1) would close the envelope; sums differing breaks equality there
    if abs(float(q.sum() - v.sum())) > tol:
        return False
    if q.size >= 3:
        curv = forward_difference_vector(q, 2)
        bend_at = np.nonzero(curv > KNOT_TOL)[0] + 1
        if np.any(np.abs(gap[bend_at]) > tol):
            return False
    return True

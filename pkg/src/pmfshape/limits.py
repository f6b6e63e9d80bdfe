"""Monte Carlo sampling of the limit laws behind the shape tests.

Three laws are drawn from:

* the minimum of a centered Gaussian vector over a selected index set
  (calibrates the min-difference statistics);
* the Euclidean distance between a multinomial-limit Gaussian vector and its
  blockwise monotone projection, blocks being the constancy regions cut after
  every slope knot;
* the analogous distance with blockwise convex projections, blocks cut one
  step after every curvature knot.

Draws are deterministic functions of (covariance, index set, B, seed).  Block
projections are vectorized over draws by enumerating active-constraint
patterns for small blocks and fall back to the iterative engines otherwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from math import ceil

import numpy as np

from .covariance import CovMatrix
from .pmf import IndexSet, difference_matrix
from .projections import pava_nonincreasing, project_convex_block

__all__ = [
    "DrawSet",
    "sample_gaussian",
    "sample_min_statistic",
    "sample_grenander_limit",
    "sample_convex_limit",
    "empirical_quantile",
    "p_value",
    "shape_blocks",
    "save_draws_csv",
]

#: blocks with at most this many free constraints use the vectorized
#: pattern-enumeration projection; larger ones loop draw by draw
MAX_ENUM_CONSTRAINTS = 6


@dataclass(frozen=True)
class DrawSet:
    """Monte Carlo draws from one calibration law."""

    draws: np.ndarray
    seed: int
    law_tag: str

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=np.float64)
        object.__setattr__(self, "draws", draws)
        if draws.ndim != 1 or draws.size == 0:
            raise ValueError("a draw set needs at least one draw")
        if not np.all(np.isfinite(draws)):
            raise ValueError("draws must be finite")

    def __len__(self) -> int:
        return int(self.draws.size)


def sample_gaussian(cov: CovMatrix, size: int, seed: int) -> np.ndarray:
    """``size`` i.i.d. rows from N(0, cov), via the repaired factor."""
    if size < 1:
        raise ValueError("need at least one draw")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((size, cov.dim)) @ cov.factor.T


def sample_min_statistic(cov: CovMatrix, selected: IndexSet, size: int, seed: int) -> DrawSet:
    """Minimum over the selected coordinates of Gaussian vector draws."""
    if selected.is_empty:
        raise ValueError("selected index set must be non-empty")
    offsets = selected.offsets()
    if offsets.max() >= cov.dim:
        raise ValueError("index set does not fit the covariance dimension")
    gauss = sample_gaussian(cov, size, seed)
    return DrawSet(draws=gauss[:, offsets].min(axis=1), seed=seed, law_tag="min-difference")


def shape_blocks(support_len: int, knots: IndexSet, k: int) -> list[tuple[int, int]]:
    """Partition offsets {0, ..., support_len-1} into projection blocks.

    Each knot j (an index on the degree-k difference support) cuts the support
    after offset ``j + k - 1``: slope knots split flat runs right at the drop,
    curvature knots split one step past the bend.
    """
    if knots.parent.k != k:
        raise ValueError(f"knot set has degree {knots.parent.k}, expected {k}")
    if len(knots.parent) + k != support_len:
        raise ValueError("inconsistent block partition")
    cuts = sorted(j - knots.parent.lo + k - 1 for j in knots)
    blocks = []
    start = 0
    for cut in cuts:
        blocks.append((start, cut))
        start = cut + 1
    blocks.append((start, support_len - 1))
    return blocks


def _pattern_projection_residual_sq(block: np.ndarray, k: int) -> np.ndarray:
    """Squared projection distances onto {diff_k >= 0}, vectorized over rows.

    Enumerates active-constraint subsets; each draw picks the unique pattern
    whose equality-constrained projection is feasible with non-negative
    multipliers.
    """
    rows, length = block.shape
    cons = difference_matrix(k, length)
    n_cons = cons.shape[0]
    res_sq = np.zeros(rows)
    assigned = np.all(block @ cons.T >= -1e-12, axis=1)  # already in the cone
    for size in range(1, n_cons + 1):
        if np.all(assigned):
            break
        for active in combinations(range(n_cons), size):
            a = cons[list(active)]
            gram_inv = np.linalg.inv(a @ a.T)
            av = block @ a.T                      # rows x size
            mult = -av @ gram_inv.T               # stationarity multipliers
            fitted = block + mult @ a
            ok = np.all(mult >= -1e-12, axis=1) & np.all(fitted @ cons.T >= -1e-12, axis=1)
            fresh = ok & ~assigned
            if np.any(fresh):
                res_sq[fresh] = np.einsum("ij,ij->i", mult[fresh] @ a, mult[fresh] @ a)
                assigned |= fresh
    if not np.all(assigned):
        # numerically awkward leftovers: solve them one by one
        for i in np.nonzero(~assigned)[0]:
            fit = pava_nonincreasing(block[i]) if k == 1 else project_convex_block(block[i])
            res_sq[i] = float(np.sum((fit - block[i]) ** 2))
    return res_sq


def _blockwise_residual_sq(gauss: np.ndarray, blocks: list[tuple[int, int]], k: int) -> np.ndarray:
    total = np.zeros(gauss.shape[0])
    for lo, hi in blocks:
        length = hi - lo + 1
        if length <= k:
            continue  # no constraint, projection is the identity
        sub = gauss[:, lo : hi + 1]
        if length - k <= MAX_ENUM_CONSTRAINTS:
            total += _pattern_projection_residual_sq(sub, k)
        elif k == 1:
            total += np.array([np.sum((pava_nonincreasing(row) - row) ** 2) for row in sub])
        else:
            total += np.array([np.sum((project_convex_block(row) - row) ** 2) for row in sub])
    return total


def sample_grenander_limit(gamma: CovMatrix, knots: IndexSet, size: int, seed: int) -> DrawSet:
    """Distance draws between Gaussian vectors and their blockwise monotone fits."""
    blocks = shape_blocks(gamma.dim, knots, 1)
    gauss = sample_gaussian(gamma, size, seed)
    draws = np.sqrt(_blockwise_residual_sq(gauss, blocks, 1))
    return DrawSet(draws=draws, seed=seed, law_tag="monotone-distance")


def sample_convex_limit(gamma: CovMatrix, knots: IndexSet, size: int, seed: int) -> DrawSet:
    """Distance draws between Gaussian vectors and their blockwise convex fits."""
    blocks = shape_blocks(gamma.dim, knots, 2)
    gauss = sample_gaussian(gamma, size, seed)
    draws = np.sqrt(_blockwise_residual_sq(gauss, blocks, 2))
    return DrawSet(draws=draws, seed=seed, law_tag="convex-distance")


def empirical_quantile(draws: DrawSet | np.ndarray, alpha: float) -> float:
    """Lower empirical quantile: the ceil(alpha * B)-th order statistic."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    values = draws.draws if isinstance(draws, DrawSet) else np.asarray(draws, dtype=np.float64)
    size = values.size
    rank = ceil(alpha * size - 1e-9)  # epsilon guards binary-fraction fuzz
    rank = min(max(rank, 1), size)
    return float(np.sort(values)[rank - 1])


def p_value(draws: DrawSet | np.ndarray, statistic: float, tail: str) -> float:
    """Fraction of draws at or beyond the statistic in the given tail."""
    values = draws.draws if isinstance(draws, DrawSet) else np.asarray(draws, dtype=np.float64)
    if tail == "lower":
        return float(np.mean(values <= statistic))
    if tail == "upper":
        return float(np.mean(values >= statistic))
    raise ValueError("tail must be 'lower' or 'upper'")


def save_draws_csv(draws: DrawSet, path) -> None:
    """Single-column CSV export, for plotting with external tools."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([draws.law_tag])
        for value in draws.draws:
            writer.writerow([repr(float(value))])

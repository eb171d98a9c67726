"""
Empirical multivariate rank map.

A sample of ``n`` points in ``R^d`` is matched one-to-one onto ``n`` target
points in ``(0, 1]^d`` so that the total squared Euclidean displacement is
minimal. In one dimension that matching is monotone, so sorting gives it
directly in O(n log n); otherwise an exact assignment problem is solved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import solve_lsap, squared_distance_cost
from .errors import DomainError, ShapeError
from .lds import DirectionNumberTable, TargetPointSet, target_points

JITTER_EXPONENT = -40


@dataclass(frozen=True)
class RankCloud:
    """Image of a sample under the rank map.

    ``points[i] == targets[sigma[i]]``.
    """

    points: np.ndarray
    sigma: np.ndarray
    generator: str
    tie_policy: str

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def as_cloud(sample) -> np.ndarray:
    """Coerce to a finite float64 ``(n, d)`` array (1-D input becomes ``(n, 1)``)."""
    arr = np.asarray(sample, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"sample must be 1-D or 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("sample contains non-finite entries")
    return arr


def ties_policy(sample) -> np.ndarray:
    """Break exact duplicate rows with a deterministic micro-jitter.

    Within each group of identical rows the k-th repeat (k = 1, 2, ... in
    index order; the first occurrence is k = 0) gets ``k * eps`` added to its
    first coordinate, ``eps = 2**-40 * max|column 0|`` (or ``2**-40`` for an
    all-zero column). Inputs without duplicates come back unchanged.
    """
    x = as_cloud(sample)
    n = x.shape[0]
    if n < 2:
        return x
    _, inverse, counts = np.unique(x, axis=0, return_inverse=True, return_counts=True)
    if counts.max() == 1:
        return x
    inverse = inverse.ravel()
    # occurrence number of each row inside its duplicate group, in index order
    order = np.argsort(inverse, kind="stable")
    group_start = np.concatenate(([0], np.cumsum(counts)[:-1]))
    occurrence = np.empty(n, dtype=np.int64)
    occurrence[order] = np.arange(n) - group_start[inverse[order]]
    scale = float(np.max(np.abs(x[:, 0])))
    if scale == 0.0:
        scale = 1.0
    eps = np.ldexp(scale, JITTER_EXPONENT)
    out = x.copy()
    out[:, 0] += occurrence * eps
    return out


def rank_map(
    sample,
    targets: TargetPointSet | np.ndarray,
    *,
    jitter_ties: bool = True,
    backend: str | None = None,
) -> RankCloud:
    """Map ``sample`` onto ``targets`` by the optimal (squared-distance) matching."""
    x = as_cloud(sample)
    if isinstance(targets, TargetPointSet):
        generator = targets.generator
        h = targets.points
    else:
        generator = "custom"
        h = np.asarray(targets, dtype=np.float64)
        if h.ndim == 1:
            h = h.reshape(-1, 1)
    if x.shape != h.shape:
        raise ShapeError(f"sample shape {x.shape} does not match targets shape {h.shape}")
    n, d = x.shape
    policy = "none"
    if jitter_ties:
        jittered = ties_policy(x)
        if jittered is not x:
            policy = "jitter"
        x = jittered

    if d == 1:
        order = np.argsort(x[:, 0], kind="stable")
        target_order = np.argsort(h[:, 0], kind="stable")
        sigma = np.empty(n, dtype=np.int64)
        sigma[order] = target_order
    else:
        sigma, _ = solve_lsap(squared_distance_cost(x, h), backend=backend)
    pts = h[sigma]
    return RankCloud(points=pts, sigma=sigma, generator=generator, tie_policy=policy)


def rank_cloud(
    sample,
    table: DirectionNumberTable | None = None,
    *,
    backend: str | None = None,
) -> RankCloud:
    """Rank map onto the default targets: ``grid1d`` for d = 1, Sobol' otherwise."""
    x = as_cloud(sample)
    return rank_map(x, target_points(x.shape[0], x.shape[1], table), backend=backend)

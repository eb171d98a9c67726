"""
Distance covariance and correlation (V-statistic form).

With ``a_kl = ||x_k - x_l||`` and ``b_kl = ||y_k - y_l||``::

    S1 = mean_kl(a_kl * b_kl)
    S2 = mean(a) * mean(b)
    S3 = (1/n) * sum_l abar_l * bbar_l        # abar_l = row mean of a
    dcov2 = S1 + S2 - 2 * S3

S3 is the triple sum ``(1/n^3) sum_ijl a_il b_jl`` factorized over ``l``,
so everything is O(n^2). Applied to rank clouds these give the
multivariate-rank distance correlation used as the screening score.

Both backends accumulate each side with the same code path, so feeding
the same cloud twice yields ``dcov2 == dvar_x == dvar_y`` bitwise and a
correlation of exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit, resolve_backend
from .errors import DegenerateInputError, DomainError, ShapeError
from .lds import DirectionNumberTable
from .mrank import as_cloud, rank_cloud

NEGATIVE_FLOOR = -1e-12


# -- kernels -----------------------------------------------------------------


@njit(cache=True, nogil=True)
def _self_summary_jit(y):
    n, d = y.shape
    b = np.zeros((n, n))
    row = np.zeros(n)
    sum_sq = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = y[i, k] - y[j, k]
                acc += diff * diff
            bij = math.sqrt(acc)
            b[i, j] = bij
            b[j, i] = bij
            row[i] += bij
            row[j] += bij
            sum_sq += bij * bij
    return b, row, 2.0 * sum_sq


@njit(cache=True, nogil=True)
def _cross_terms_jit(x, b):
    n, d = x.shape
    row = np.zeros(n)
    sum_ab = 0.0
    sum_sq = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
            aij = math.sqrt(acc)
            row[i] += aij
            row[j] += aij
            sum_ab += aij * b[i, j]
            sum_sq += aij * aij
    return row, 2.0 * sum_ab, 2.0 * sum_sq


def _distance_matrix_numpy(x: np.ndarray) -> np.ndarray:
    n, d = x.shape
    acc = np.zeros((n, n))
    for k in range(d):
        diff = x[:, k, None] - x[None, :, k]
        acc += diff * diff
    return np.sqrt(acc)


def _self_summary_numpy(y: np.ndarray):
    b = _distance_matrix_numpy(y)
    return b, b.sum(axis=1), float((b * b).sum())


def _cross_terms_numpy(x: np.ndarray, b: np.ndarray):
    a = _distance_matrix_numpy(x)
    return a.sum(axis=1), float((a * b).sum()), float((a * a).sum())


# -- public types --------------------------------------------------------------


def _variance_from_sums(sum_sq: float, row: np.ndarray, n: int) -> float:
    n2 = float(n) * n
    grand = float(row.sum()) / n2
    return sum_sq / n2 + grand * grand - 2.0 * float(np.dot(row, row)) / (n2 * n)


@dataclass(frozen=True)
class PairwiseDistanceSummary:
    """Distance matrix of one cloud plus the sums every estimator needs."""

    matrix: np.ndarray
    row_sums: np.ndarray
    sum_sq: float
    n: int
    dim: int
    backend: str

    @property
    def row_means(self) -> np.ndarray:
        return self.row_sums / self.n

    @property
    def grand_mean(self) -> float:
        return float(self.row_sums.sum()) / (float(self.n) * self.n)

    @property
    def dvar(self) -> float:
        return _variance_from_sums(self.sum_sq, self.row_sums, self.n)


@dataclass(frozen=True)
class DcovTerms:
    s1: float
    s2: float
    s3: float
    dcov2: float
    dvar_x: float
    dvar_y: float
    n: int
    dims: tuple


def _check_n(x: np.ndarray) -> None:
    if x.shape[0] < 2:
        raise DomainError(f"need at least 2 observations, got {x.shape[0]}")


def distance_summary(cloud, backend: str | None = None) -> PairwiseDistanceSummary:
    y = np.ascontiguousarray(as_cloud(cloud))
    _check_n(y)
    be = resolve_backend(backend)
    if be == "numba":
        b, row, sum_sq = _self_summary_jit(y)
    else:
        b, row, sum_sq = _self_summary_numpy(y)
    b.flags.writeable = False
    row.flags.writeable = False
    return PairwiseDistanceSummary(
        matrix=b, row_sums=row, sum_sq=float(sum_sq), n=y.shape[0], dim=y.shape[1], backend=be
    )


def dcov_terms_against(cloud_x, summary_y: PairwiseDistanceSummary) -> DcovTerms:
    """Terms for ``cloud_x`` against a precomputed response summary."""
    x = np.ascontiguousarray(as_cloud(cloud_x))
    n = x.shape[0]
    if n != summary_y.n:
        raise ShapeError(f"sample sizes differ: {n} vs {summary_y.n}")
    _check_n(x)
    if summary_y.backend == "numba":
        row_x, sum_ab, sum_sq_x = _cross_terms_jit(x, summary_y.matrix)
    else:
        row_x, sum_ab, sum_sq_x = _cross_terms_numpy(x, summary_y.matrix)
    n2 = float(n) * n
    row_y = summary_y.row_sums
    s1 = float(sum_ab) / n2
    s2 = (float(row_x.sum()) / n2) * (float(row_y.sum()) / n2)
    s3 = float(np.dot(row_x, row_y)) / (n2 * n)
    dcov2 = s1 + s2 - 2.0 * s3
    if NEGATIVE_FLOOR <= dcov2 < 0.0:
        dcov2 = 0.0
    return DcovTerms(
        s1=s1,
        s2=s2,
        s3=s3,
        dcov2=dcov2,
        dvar_x=_variance_from_sums(float(sum_sq_x), row_x, n),
        dvar_y=summary_y.dvar,
        n=n,
        dims=(x.shape[1], summary_y.dim),
    )


def dcov_terms(cloud_x, cloud_y, backend: str | None = None) -> DcovTerms:
    x = as_cloud(cloud_x)
    y = as_cloud(cloud_y)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"sample sizes differ: {x.shape[0]} vs {y.shape[0]}")
    return dcov_terms_against(x, distance_summary(y, backend=backend))


def dcor_sq_from_terms(terms: DcovTerms) -> float:
    """Squared distance correlation, clamped to [0, 1]."""
    if not (terms.dvar_x > 0.0 and terms.dvar_y > 0.0):
        raise DegenerateInputError(
            f"zero distance variance (dvar_x={terms.dvar_x!r}, dvar_y={terms.dvar_y!r})"
        )
    r2 = terms.dcov2 / math.sqrt(terms.dvar_x * terms.dvar_y)
    return min(max(r2, 0.0), 1.0)


def dcor(cloud_x, cloud_y, backend: str | None = None) -> float:
    """Distance correlation of two clouds with the same number of rows."""
    return math.sqrt(dcor_sq_from_terms(dcov_terms(cloud_x, cloud_y, backend=backend)))


def mrdc(
    sample_x,
    sample_y,
    table: DirectionNumberTable | None = None,
    backend: str | None = None,
) -> float:
    """Squared multivariate-rank distance correlation (the screening score).

    Both samples are rank-mapped (``grid1d`` when one-dimensional, Sobol'
    otherwise) and the squared distance correlation of the rank clouds is
    returned.
    """
    x = as_cloud(sample_x)
    y = as_cloud(sample_y)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"sample sizes differ: {x.shape[0]} vs {y.shape[0]}")
    rx = rank_cloud(x, table, backend=backend)
    ry = rank_cloud(y, table, backend=backend)
    return dcor_sq_from_terms(dcov_terms(rx.points, ry.points, backend=backend))

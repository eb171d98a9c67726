"""
Exact linear sum assignment (square, dense, minimization).

Shortest-augmenting-path Hungarian method with row/column potentials,
O(n^3) time and O(n^2) memory for the cost matrix. Column potentials
start at the column minima (a feasible dual that shortens the first
searches on badly scaled costs). Rows are inserted in ascending order;
each Dijkstra-like sweep picks the lowest-index column among equal
reduced costs. That scan order fixes which optimal permutation
comes back when several exist, and both backends follow it exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit, resolve_backend
from .errors import DomainError, ShapeError


@njit(cache=True, nogil=True)
def _lsap_jit(cost):
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    for j in range(1, n + 1):
        m = np.inf
        for i in range(n):
            if cost[i, j - 1] < m:
                m = cost[i, j - 1]
        v[j] = m
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = np.inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            ui0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    sigma = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        sigma[p[j] - 1] = j - 1
    return sigma


def _lsap_numpy(cost: np.ndarray) -> np.ndarray:
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    v[1:] = cost.min(axis=0)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=bool)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = np.inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    sigma = np.empty(n, dtype=np.int64)
    sigma[p[1:] - 1] = np.arange(n)
    return sigma


def _check_cost(cost) -> np.ndarray:
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise DomainError("cost matrix contains non-finite entries")
    return np.ascontiguousarray(c)


def solve_lsap(cost, backend: str | None = None) -> tuple[np.ndarray, float]:
    """Minimum-cost perfect matching of rows to columns.

    Returns ``(sigma, total)`` where ``sigma[i]`` is the column assigned to
    row ``i`` (0-based) and ``total`` is the exactly rounded sum of the
    selected entries.

    >>> solve_lsap([[2, 1], [1, 2]])
    (array([1, 0]), 2.0)
    """
    c = _check_cost(cost)
    n = c.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), 0.0
    if resolve_backend(backend) == "numba":
        sigma = _lsap_jit(c)
    else:
        sigma = _lsap_numpy(c)
    total = math.fsum(c[np.arange(n), sigma])
    return sigma, total


def squared_distance_cost(sample: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """``C[i, k] = ||sample_i - targets_k||^2`` (no square root; same argmin)."""
    n, d = sample.shape
    cost = np.zeros((n, targets.shape[0]))
    for k in range(d):
        diff = sample[:, k, None] - targets[None, :, k]
        cost += diff * diff
    return cost

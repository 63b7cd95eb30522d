"""K-means clustering: restart-boosted Lloyd and an exact small oracle.

The detection pipeline needs a clustering whose cost is within (1 + eps)
of optimal.  Sampling-based approximation schemes with that guarantee
are far heavier than their role here warrants; instead we run
distance-squared-proportional seeding followed by Lloyd iteration,
ceil(10 / eps) independent restarts (capped at 200), and keep the best
run.  kmeans_exact enumerates all partitions of up to 14 points so tests
can enforce the (1 + eps) contract on every desk-scale instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import KMEANS_STREAM, rng_from

MAX_LLOYD_ITER = 100
MAX_RESTARTS = 200
EXACT_LIMIT = 14


@dataclass(frozen=True)
class KMeansResult:
    """Labels in 0..K-1, the K centers, and the exact stored cost."""

    assignment: np.ndarray
    centers: np.ndarray
    cost: float
    cost_trace: np.ndarray = field(default_factory=lambda: np.empty(0))


def _sq_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


def _dsq_seed(points: np.ndarray, K: int, rng) -> np.ndarray:
    """Seed centers proportionally to squared distance from chosen ones."""
    m = len(points)
    centers = np.empty((K, points.shape[1]))
    centers[0] = points[rng.integers(m)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            pick = int(rng.integers(m))
        else:
            pick = int(rng.choice(m, p=d2 / total))
        centers[k] = points[pick]
        d2 = np.minimum(d2, ((points - centers[k]) ** 2).sum(axis=1))
    return centers


def lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = MAX_LLOYD_ITER) -> KMeansResult:
    """Lloyd iteration to an assignment fixed point (or max_iter).

    An empty cluster is reseeded at the point currently farthest from its
    own center, which keeps the recorded cost trace non-increasing.
    """
    centers = np.array(centers, dtype=float)
    K = len(centers)
    prev = None
    trace = []
    for _ in range(max_iter):
        D = _sq_distances(points, centers)
        assign = D.argmin(axis=1)
        own = D[np.arange(len(points)), assign]
        for e in np.flatnonzero(np.bincount(assign, minlength=K) == 0):
            far = int(own.argmax())
            centers[e] = points[far]
            assign[far] = e
            own[far] = 0.0
        trace.append(float(own.sum()))
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        for k in range(K):
            members = assign == k
            if members.any():
                centers[k] = points[members].mean(axis=0)
    cost = float(((points - centers[assign]) ** 2).sum())
    return KMeansResult(assignment=assign, centers=centers, cost=cost, cost_trace=np.array(trace))


def kmeans_approx(points: np.ndarray, K: int, eps: float, seed: int) -> KMeansResult:
    """Best of ceil(10 / eps) seeded Lloyd runs; deterministic given seed.

    Restarts draw from independent streams and the winner is picked by
    (cost, restart index), so running them in parallel cannot change the
    result.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if not np.isfinite(points).all():
        raise ValueError("points contain non-finite coordinates")
    if K < 1 or len(points) < K:
        raise ValueError(f"need at least K={K} points, got {len(points)}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    restarts = min(math.ceil(10.0 / eps), MAX_RESTARTS)
    best: KMeansResult | None = None
    for r in range(restarts):
        rng = rng_from(seed, KMEANS_STREAM, r)
        centers = _dsq_seed(points, K, rng)
        result = lloyd(points, centers)
        if best is None or result.cost < best.cost:
            best = result
    return best


def kmeans_exact(points: np.ndarray, K: int) -> KMeansResult:
    """Globally optimal K-means by branch-and-bound partition enumeration.

    Only partitions in canonical order are visited (a point may open at
    most one new cluster), so label permutations are never re-counted.
    Limited to 14 points.
    """
    points = np.asarray(points, dtype=float)
    m, d = points.shape
    if m > EXACT_LIMIT:
        raise ValueError(f"exact solver limited to {EXACT_LIMIT} points, got {m}")
    if K < 1:
        raise ValueError("K must be positive")
    sq = (points**2).sum(axis=1)

    assign = np.zeros(m, dtype=np.int64)
    best_cost = math.inf
    best_assign = assign.copy()
    counts = np.zeros(K, dtype=np.int64)
    sums = np.zeros((K, d))
    sumsq = np.zeros(K)
    cluster_cost = np.zeros(K)

    def recurse(i: int, used: int, total: float) -> None:
        nonlocal best_cost, best_assign
        if total >= best_cost:
            return
        if i == m:
            best_cost = total
            best_assign = assign.copy()
            return
        limit = min(used + 1, K)
        for c in range(limit):
            old_cost = cluster_cost[c]
            counts[c] += 1
            sums[c] += points[i]
            sumsq[c] += sq[i]
            new_cost = sumsq[c] - (sums[c] ** 2).sum() / counts[c]
            cluster_cost[c] = new_cost
            assign[i] = c
            recurse(i + 1, max(used, c + 1), total - old_cost + new_cost)
            counts[c] -= 1
            sums[c] -= points[i]
            sumsq[c] -= sq[i]
            cluster_cost[c] = old_cost

    recurse(0, 0, 0.0)
    centers = np.tile(points.mean(axis=0), (K, 1))
    for k in range(K):
        members = best_assign == k
        if members.any():
            centers[k] = points[members].mean(axis=0)
    cost = float(((points - centers[best_assign]) ** 2).sum())
    return KMeansResult(assignment=best_assign, centers=centers, cost=cost)

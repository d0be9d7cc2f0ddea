"""K-means clustering of the reduced embeddings.

Lloyd iteration with k-means++ seeding, multi-restart selection of the
lowest within-cluster sum of squares (WCSS), and automated elbow-based
choice of the cluster count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class ClusterModel:
    """Fitted partition: centroids, assignments, and the WCSS achieved."""

    k: int
    centroids: np.ndarray  # (k, dim)
    assignments: np.ndarray  # (n,) ints in [0, k)
    wcss: float
    iterations: int
    restarts_run: int = 1
    wcss_history: list[float] = field(default_factory=list)


@dataclass
class ElbowCurve:
    """Best-of-restarts WCSS per candidate k and the selected elbow."""

    k_values: list[int]
    wcss_values: list[float]
    selected_k: int


def _squared_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        np.einsum("ij,ij->i", X, X)[:, None]
        + np.einsum("ij,ij->i", centroids, centroids)[None, :]
        - 2.0 * (X @ centroids.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _wcss(X: np.ndarray, assignments: np.ndarray, centroids: np.ndarray) -> float:
    diffs = X - centroids[assignments]
    return float(np.einsum("ij,ij->", diffs, diffs))


def kmeans_pp_init(X: np.ndarray, k: int, seed: int) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, each next data point
    drawn with probability proportional to its squared distance to the
    nearest chosen centroid.  Returns k distinct points of X."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    distinct = np.unique(X, axis=0).shape[0]
    if k > distinct:
        raise ValueError(f"k={k} exceeds the {distinct} distinct points available")
    rng = np.random.default_rng(seed)
    centroids = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = X[first]
    if k == 1:
        return centroids
    d2 = _squared_distances(X, centroids[:1])[:, 0]
    for c in range(1, k):
        total = d2.sum()
        # total > 0 is guaranteed while fewer than `distinct` points are chosen
        chosen = int(rng.choice(n, p=d2 / total))
        centroids[c] = X[chosen]
        np.minimum(d2, _squared_distances(X, centroids[c : c + 1])[:, 0], out=d2)
    return centroids


def _repair_empty_clusters(
    X: np.ndarray, assignments: np.ndarray, centroids: np.ndarray
) -> None:
    """Re-seed each empty cluster at the point farthest from its centroid."""
    k = centroids.shape[0]
    for _ in range(k):
        counts = np.bincount(assignments, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return
        diffs = X - centroids[assignments]
        dist = np.einsum("ij,ij->i", diffs, diffs)
        for c in empty:
            farthest = int(np.argmax(dist))
            centroids[c] = X[farthest]
            assignments[farthest] = c
            dist[farthest] = 0.0


def lloyd(
    X: np.ndarray,
    init_centroids: np.ndarray,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterModel:
    """Lloyd iteration from the given distinct centroids.

    Alternates nearest-centroid assignment (ties to the lowest cluster
    id) with mean updates until the largest centroid displacement drops
    below ``tol`` or ``max_iter`` is reached.  Empty clusters are
    re-seeded at the point farthest from its assigned centroid.  The
    recorded per-iteration WCSS never increases, and the returned
    assignment is a fixed point of the returned centroids.
    """
    X = np.asarray(X, dtype=np.float64)
    centroids = np.array(init_centroids, dtype=np.float64, copy=True)
    k = centroids.shape[0]
    if np.unique(centroids, axis=0).shape[0] != k:
        raise ValueError("initial centroids must be distinct")

    wcss_history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        assignments = np.argmin(_squared_distances(X, centroids), axis=1)
        _repair_empty_clusters(X, assignments, centroids)
        new_centroids = centroids.copy()
        for c in range(k):
            members = assignments == c
            if members.any():
                new_centroids[c] = X[members].mean(axis=0)
        wcss_history.append(_wcss(X, assignments, new_centroids))
        shift = float(np.linalg.norm(new_centroids - centroids, axis=1).max())
        centroids = new_centroids
        if shift < tol:
            break

    assignments = np.argmin(_squared_distances(X, centroids), axis=1)
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=assignments,
        wcss=_wcss(X, assignments, centroids),
        iterations=iterations,
        wcss_history=wcss_history,
    )


def best_of_restarts(
    X: np.ndarray,
    k: int,
    restarts: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
    threads: int = 1,
) -> ClusterModel:
    """Run k-means++ plus Lloyd ``restarts`` times and keep the lowest WCSS.

    Restart r derives its seed as ``seed + r``, so parallel and serial
    execution select the same winner (ties go to the lower restart index).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    def run(r: int) -> ClusterModel:
        init = kmeans_pp_init(X, k, seed + r)
        return lloyd(X, init, max_iter=max_iter, tol=tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            models = list(pool.map(run, range(restarts)))
    else:
        models = [run(r) for r in range(restarts)]

    best = min(enumerate(models), key=lambda pair: (pair[1].wcss, pair[0]))[1]
    best.restarts_run = restarts
    return best


def elbow_select(
    X: np.ndarray,
    k_min: int,
    k_max: int,
    restarts: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
    threads: int = 1,
) -> ElbowCurve:
    """Scan k in [k_min, k_max] and pick the elbow of the WCSS curve.

    After min-max normalizing both axes, the selected k maximizes the
    perpendicular distance to the chord joining the curve's endpoints.
    A flat curve (zero distance everywhere) falls back to k_min with a
    warning.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k_min < k_max <= n:
        raise ValueError(f"need 1 <= k_min < k_max <= n, got [{k_min}, {k_max}] for n={n}")
    k_values = list(range(k_min, k_max + 1))
    if len(k_values) < 3:
        raise ValueError("elbow selection needs at least 3 candidate k values")

    wcss_values = [
        best_of_restarts(
            X, k, restarts, seed, max_iter=max_iter, tol=tol, threads=threads
        ).wcss
        for k in k_values
    ]
    for prev, cur in zip(wcss_values, wcss_values[1:]):
        if cur > prev * (1.0 + 1e-6):
            logger.warning(
                "best-of-restarts WCSS increased with k (%.6g -> %.6g); "
                "consider more restarts",
                prev,
                cur,
            )

    ks = np.asarray(k_values, dtype=np.float64)
    ws = np.asarray(wcss_values, dtype=np.float64)
    k_range = ks[-1] - ks[0]
    w_range = ws.max() - ws.min()
    if w_range <= 0.0:
        logger.warning("flat WCSS curve; elbow selection falls back to k_min=%d", k_min)
        return ElbowCurve(k_values, wcss_values, k_min)
    kn = (ks - ks[0]) / k_range
    wn = (ws - ws.min()) / w_range
    # Perpendicular distance from each normalized point to the endpoint chord.
    ax, ay = kn[0], wn[0]
    bx, by = kn[-1], wn[-1]
    chord = math.hypot(bx - ax, by - ay)
    dist = np.abs((bx - ax) * (ay - wn) - (ax - kn) * (by - ay)) / chord
    if dist.max() < 1e-12:
        logger.warning("flat WCSS curve; elbow selection falls back to k_min=%d", k_min)
        return ElbowCurve(k_values, wcss_values, k_min)
    selected = k_values[int(np.argmax(dist))]
    return ElbowCurve(k_values, wcss_values, selected)

"""Nonlinear dimensionality reduction of embedding matrices.

Pipeline: exact k-nearest-neighbor graph -> per-point bandwidth
calibration -> fuzzy graph via probabilistic union -> low-dimensional
kernel fit -> spectral or random initialization -> stochastic gradient
layout optimization.  Single-threaded runs are bit-for-bit reproducible
for a fixed seed.
"""

from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import NumericError

logger = logging.getLogger(__name__)

# Added to squared distances in gradient denominators so coincident
# points do not divide by zero.
_DIST_EPS = 1e-3
_GRAD_CLIP = 4.0


@dataclass(frozen=True)
class KnnGraph:
    """Exact k-nearest neighbors: ids and ascending distances per row."""

    indices: np.ndarray  # (n, k) int
    distances: np.ndarray  # (n, k) float, ascending per row

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]


@dataclass
class FuzzyGraph:
    """Sparse symmetric weighted graph; both edge directions are stored."""

    n: int
    edges: dict[tuple[int, int], float]

    def weight(self, i: int, j: int) -> float:
        return self.edges.get((i, j), 0.0)

    def neighbor_sets(self) -> list[set[int]]:
        sets: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            sets[i].add(j)
        return sets


@dataclass(frozen=True)
class CurveParams:
    """Low-dimensional similarity kernel 1 / (1 + a * d^(2b))."""

    a: float
    b: float
    min_dist: float
    spread: float


def knn_graph(
    X: np.ndarray, k: int, metric: str = "euclidean", threads: int = 1
) -> KnnGraph:
    """Exact k nearest neighbors per point, brute force.

    Ties break toward the lower point index; a point is never its own
    neighbor.  Results are independent of ``threads``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < rows, got k={k} for {n} rows")

    def neighbors_for(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dist = _pairwise_distances_block(X, rows, metric)
        dist[np.arange(len(rows)), rows] = np.inf
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        return order, np.take_along_axis(dist, order, axis=1)

    chunks = np.array_split(np.arange(n), max(threads, 1))
    chunks = [c for c in chunks if len(c)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(neighbors_for, chunks))
    else:
        parts = [neighbors_for(c) for c in chunks]
    indices = np.vstack([p[0] for p in parts])
    distances = np.vstack([p[1] for p in parts])
    return KnnGraph(indices=indices, distances=distances)


def _pairwise_distances_block(X: np.ndarray, rows: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        sq = np.einsum("ij,ij->i", X, X)
        d2 = sq[rows, None] + sq[None, :] - 2.0 * (X[rows] @ X.T)
        np.maximum(d2, 0.0, out=d2)
        return np.sqrt(d2)
    if metric == "cosine":
        norms = np.maximum(np.linalg.norm(X, axis=1), 1e-12)
        unit = X / norms[:, None]
        dist = 1.0 - unit[rows] @ unit.T
        np.clip(dist, 0.0, 2.0, out=dist)
        return dist
    raise ValueError(f"unknown metric {metric!r}; expected 'euclidean' or 'cosine'")


def smooth_knn_calibrate(row_distances, k: int) -> tuple[float, float]:
    """Per-point bandwidth: rho is the smallest positive neighbor
    distance, sigma solves sum_j exp(-max(0, d_j - rho) / sigma) = log2(k).

    Binary search runs 64 iterations or until the sum is within 1e-5 of
    the target; sigma is clamped from below to 1e-3 times the row's mean
    distance.  Degenerate all-equal rows hit the clamp.
    """
    d = np.asarray(row_distances, dtype=np.float64)
    if d.shape != (k,):
        raise ValueError(f"expected {k} distances, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("neighbor distances must be finite")

    positive = d[d > 0.0]
    rho = float(positive[0]) if positive.size else 0.0
    target = math.log2(k)

    lo, hi, mid = 0.0, math.inf, 1.0
    for _ in range(64):
        psum = float(np.exp(-np.maximum(d - rho, 0.0) / mid).sum())
        if abs(psum - target) < 1e-5:
            break
        if psum > target:
            hi = mid
            mid = (lo + hi) / 2.0
        else:
            lo = mid
            mid = mid * 2.0 if math.isinf(hi) else (lo + hi) / 2.0
    sigma = mid

    clamp = 1e-3 * float(d.mean())
    if sigma < clamp:
        sigma = clamp
    return rho, sigma


def membership_strength(distance: float, rho: float, sigma: float) -> float:
    """Directed edge weight exp(-max(0, d - rho) / sigma), safe at sigma=0."""
    gap = distance - rho
    if gap <= 0.0:
        return 1.0
    if sigma <= 0.0:
        return 0.0
    return math.exp(-gap / sigma)


def probabilistic_union(x: float, y: float) -> float:
    """Fuzzy union of two directed memberships: x + y - x*y.

    Evaluated as 1 - (1-x)(1-y), which cannot round outside [0, 1].
    """
    return 1.0 - (1.0 - x) * (1.0 - y)


def fuzzy_simplicial_set(knn: KnnGraph) -> FuzzyGraph:
    """Calibrate each row, then symmetrize directed memberships.

    Directed weights a(i,j) = exp(-max(0, d_ij - rho_i) / sigma_i) are
    combined into b = a + a^T - a o a^T; exact zeros are dropped.  The
    result stores both (i, j) and (j, i) with identical weights.
    """
    n, k = knn.n, knn.k
    directed: dict[tuple[int, int], float] = {}
    for i in range(n):
        rho, sigma = smooth_knn_calibrate(knn.distances[i], k)
        for j, dist in zip(knn.indices[i], knn.distances[i]):
            directed[(i, int(j))] = membership_strength(float(dist), rho, sigma)

    edges: dict[tuple[int, int], float] = {}
    for (i, j), a_ij in directed.items():
        if (j, i) in edges:
            continue
        a_ji = directed.get((j, i), 0.0)
        w = probabilistic_union(a_ij, a_ji)
        if w > 0.0:
            edges[(i, j)] = w
            edges[(j, i)] = w
    return FuzzyGraph(n=n, edges=edges)


def _kernel(d: np.ndarray, a: float, b: float) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return 1.0 / (1.0 + a * d ** (2.0 * b))


def target_membership(d: np.ndarray, min_dist: float, spread: float) -> np.ndarray:
    """Ideal low-dimensional membership: 1 inside min_dist, then
    exponential decay with the given spread."""
    d = np.asarray(d, dtype=np.float64)
    return np.where(d <= min_dist, 1.0, np.exp(-(d - min_dist) / spread))


def curve_fit_grid(spread: float, points: int = 300) -> np.ndarray:
    """Fixed sample grid for the kernel fit, reproducible across runs."""
    return np.linspace(0.0, 3.0 * spread, points)


def fit_curve_params(min_dist: float, spread: float) -> CurveParams:
    """Least-squares fit of the kernel 1/(1 + a*d^(2b)) to the target
    membership on a 300-point grid over [0, 3*spread]."""
    if spread <= 0.0:
        raise ValueError("spread must be positive")
    if not 0.0 <= min_dist < 3.0 * spread:
        raise ValueError("min_dist must satisfy 0 <= min_dist < 3*spread")
    grid = curve_fit_grid(spread)
    target = target_membership(grid, min_dist, spread)
    try:
        (a, b), _ = curve_fit(_kernel, grid, target, p0=(1.0, 1.0), maxfev=5000)
    except RuntimeError as exc:
        raise NumericError(f"kernel fit did not converge: {exc}") from exc
    if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
        raise NumericError(f"kernel fit produced invalid parameters a={a}, b={b}")
    return CurveParams(a=float(a), b=float(b), min_dist=min_dist, spread=spread)


def initialize_layout(
    graph: FuzzyGraph,
    n_components: int,
    seed: int,
    mode: str = "spectral",
) -> np.ndarray:
    """Initial layout in [-10, 10]^n_components.

    Spectral mode embeds with the first nontrivial eigenvectors of the
    symmetric normalized graph Laplacian; any degeneracy (disconnected
    graph, isolated node, solver failure) falls back to the seeded
    random mode with a logged warning.
    """
    if graph.n < 1:
        raise ValueError("cannot initialize a layout for an empty graph")
    if mode not in ("spectral", "random"):
        raise ValueError(f"unknown init mode {mode!r}")
    rng = np.random.default_rng(seed)
    random_layout = rng.uniform(-10.0, 10.0, size=(graph.n, n_components))
    if mode == "random":
        return random_layout

    reason = None
    if n_components + 1 > graph.n:
        reason = "graph too small for spectral embedding"
    else:
        adjacency = np.zeros((graph.n, graph.n))
        for (i, j), w in graph.edges.items():
            adjacency[i, j] = w
        degrees = adjacency.sum(axis=1)
        if np.any(degrees <= 0.0):
            reason = "graph has isolated nodes"
        else:
            inv_sqrt = 1.0 / np.sqrt(degrees)
            laplacian = np.eye(graph.n) - (adjacency * inv_sqrt[:, None]) * inv_sqrt[None, :]
            try:
                eigenvalues, eigenvectors = np.linalg.eigh(laplacian)
            except np.linalg.LinAlgError as exc:
                reason = f"eigensolver failed: {exc}"
            else:
                if eigenvalues[1] < 1e-8:
                    reason = "graph is disconnected (repeated zero eigenvalue)"
                else:
                    layout = eigenvectors[:, 1 : n_components + 1]
                    peak = np.abs(layout).max()
                    if peak == 0.0 or not np.all(np.isfinite(layout)):
                        reason = "degenerate spectral coordinates"
                    else:
                        return layout * (10.0 / peak)
    logger.warning("spectral initialization fell back to random: %s", reason)
    return random_layout


def _edge_schedule(weights: list[float], epochs: int) -> list[int]:
    """Updates per edge: ceil(epochs * w / w_max), at least 1."""
    w_max = max(weights)
    return [math.ceil(epochs * w / w_max) for w in weights]


def _optimize_edges(
    positions: list[list[float]],
    edge_list: list[tuple[int, int]],
    counts: list[int],
    neighbor_sets: list[set[int]],
    params: CurveParams,
    epochs: int,
    epoch: int,
    alpha: float,
    neg_samples: int,
    rng: random.Random,
    dims: int,
    n: int,
) -> None:
    """Apply one epoch's scheduled updates for the given edges in order."""
    a, b = params.a, params.b
    clip = _GRAD_CLIP
    randrange = rng.randrange
    for idx, (i, j) in enumerate(edge_list):
        n_e = counts[idx]
        if ((epoch + 1) * n_e) // epochs <= (epoch * n_e) // epochs:
            continue
        yi = positions[i]
        yj = positions[j]
        dist_sq = 0.0
        for d in range(dims):
            diff = yi[d] - yj[d]
            dist_sq += diff * diff
        if dist_sq > 0.0:
            powed = dist_sq**b
            coeff = (-2.0 * a * b * powed) / ((dist_sq + _DIST_EPS) * (1.0 + a * powed))
            for d in range(dims):
                g = coeff * (yi[d] - yj[d])
                if g > clip:
                    g = clip
                elif g < -clip:
                    g = -clip
                yi[d] += alpha * g
                yj[d] -= alpha * g
        neighbors = neighbor_sets[i]
        for _ in range(neg_samples):
            other = randrange(n)
            tries = 0
            while (other == i or other in neighbors) and tries < 8:
                other = randrange(n)
                tries += 1
            if other == i or other in neighbors:
                continue
            yo = positions[other]
            dist_sq = 0.0
            for d in range(dims):
                diff = yi[d] - yo[d]
                dist_sq += diff * diff
            powed = dist_sq**b
            coeff = (2.0 * b) / ((dist_sq + _DIST_EPS) * (1.0 + a * powed))
            for d in range(dims):
                g = coeff * (yi[d] - yo[d])
                if g > clip:
                    g = clip
                elif g < -clip:
                    g = -clip
                yi[d] += alpha * g


def optimize_layout(
    graph: FuzzyGraph,
    init: np.ndarray,
    params: CurveParams,
    epochs: int = 200,
    neg_samples: int = 5,
    learning_rate: float = 1.0,
    seed: int = 42,
    threads: int = 1,
) -> np.ndarray:
    """Stochastic gradient descent on the fuzzy cross-entropy layout.

    Each directed edge with weight w receives ceil(epochs * w / w_max)
    evenly spaced updates: an attractive move of both endpoints under
    the fitted kernel plus ``neg_samples`` repulsive moves of the head
    against uniformly drawn non-neighbors.  Gradient components are
    clipped to [-4, 4] and the learning rate decays linearly to zero,
    so every output value is finite.  With ``threads`` == 1 the result
    is a deterministic function of (graph, init, params, seed); with
    more threads edge updates interleave without locks and results vary
    run to run.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if neg_samples < 1:
        raise ValueError("neg_samples must be >= 1")
    init = np.asarray(init, dtype=np.float64)
    if init.shape[0] != graph.n:
        raise ValueError("init layout row count does not match graph size")
    positions = [list(map(float, row)) for row in init]
    if not graph.edges:
        return np.asarray(positions, dtype=np.float64)

    dims = init.shape[1]
    n = graph.n
    edge_items = sorted(graph.edges.items())
    edge_list = [pair for pair, _ in edge_items]
    counts = _edge_schedule([w for _, w in edge_items], epochs)
    neighbor_sets = graph.neighbor_sets()

    if threads > 1:
        chunk_bounds = np.array_split(np.arange(len(edge_list)), threads)
        chunks = [
            (edge_list[c[0] : c[-1] + 1], counts[c[0] : c[-1] + 1])
            for c in chunk_bounds
            if len(c)
        ]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for epoch in range(epochs):
                alpha = learning_rate * (1.0 - epoch / epochs)
                futures = [
                    pool.submit(
                        _optimize_edges,
                        positions,
                        chunk_edges,
                        chunk_counts,
                        neighbor_sets,
                        params,
                        epochs,
                        epoch,
                        alpha,
                        neg_samples,
                        random.Random(seed * 1_000_003 + epoch * 1009 + widx),
                        dims,
                        n,
                    )
                    for widx, (chunk_edges, chunk_counts) in enumerate(chunks)
                ]
                for future in futures:
                    future.result()
    else:
        rng = random.Random(seed)
        for epoch in range(epochs):
            alpha = learning_rate * (1.0 - epoch / epochs)
            _optimize_edges(
                positions,
                edge_list,
                counts,
                neighbor_sets,
                params,
                epochs,
                epoch,
                alpha,
                neg_samples,
                rng,
                dims,
                n,
            )
    return np.asarray(positions, dtype=np.float64)


def reduce_embeddings(
    X: np.ndarray,
    n_neighbors: int = 15,
    n_components: int = 2,
    metric: str = "cosine",
    min_dist: float = 0.1,
    spread: float = 1.0,
    epochs: int = 200,
    neg_samples: int = 5,
    learning_rate: float = 1.0,
    init: str = "spectral",
    seed: int = 42,
    threads: int = 1,
) -> np.ndarray:
    """Full reduction: knn -> calibrate -> fuzzy graph -> kernel fit ->
    initialize -> optimize.  Returns an n x n_components float layout."""
    X = np.asarray(X, dtype=np.float64)
    knn = knn_graph(X, n_neighbors, metric=metric, threads=threads)
    graph = fuzzy_simplicial_set(knn)
    params = fit_curve_params(min_dist, spread)
    layout = initialize_layout(graph, n_components, seed=seed, mode=init)
    return optimize_layout(
        graph,
        layout,
        params,
        epochs=epochs,
        neg_samples=neg_samples,
        learning_rate=learning_rate,
        seed=seed,
        threads=threads,
    )

"""Tests for the UMAP-style reduction pipeline.

Numeric fixtures are checked against independent oracles: a scalar
bisection solver for bandwidth calibration, and a grid-plus-coordinate
descent least-squares fit for the kernel parameters.
"""

import logging
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from topicforge import (
    CurveParams,
    FuzzyGraph,
    fit_curve_params,
    fuzzy_simplicial_set,
    initialize_layout,
    knn_graph,
    optimize_layout,
    reduce_embeddings,
    smooth_knn_calibrate,
)
from topicforge.reduction import (
    curve_fit_grid,
    membership_strength,
    probabilistic_union,
    target_membership,
)


class TestKnnGraph:
    def test_line_points(self):
        X = np.array([[0.0], [1.0], [3.0]])
        graph = knn_graph(X, 1, metric="euclidean")
        assert graph.indices[:, 0].tolist() == [1, 0, 1]
        assert np.allclose(graph.distances[:, 0], [1.0, 1.0, 2.0])

    def test_identical_points_mutual_at_zero(self):
        X = np.array([[2.0, 2.0], [2.0, 2.0]])
        graph = knn_graph(X, 1, metric="euclidean")
        assert graph.indices[:, 0].tolist() == [1, 0]
        assert np.allclose(graph.distances, 0.0)

    def test_never_contains_self(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(30, 4))
        graph = knn_graph(X, 6, metric="euclidean")
        for i in range(30):
            assert i not in graph.indices[i]

    def test_distances_sorted_ascending(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(25, 3))
        graph = knn_graph(X, 7, metric="cosine")
        assert np.all(np.diff(graph.distances, axis=1) >= 0)
        assert np.all(np.isfinite(graph.distances))

    def test_ties_break_to_lower_index(self):
        # three copies of the same point: neighbors listed by index
        X = np.zeros((3, 2))
        graph = knn_graph(X, 2, metric="euclidean")
        assert graph.indices[0].tolist() == [1, 2]
        assert graph.indices[1].tolist() == [0, 2]
        assert graph.indices[2].tolist() == [0, 1]

    def test_k_must_be_below_rows(self):
        with pytest.raises(ValueError):
            knn_graph(np.zeros((10, 2)), 15)

    def test_threads_do_not_change_result(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(40, 8))
        serial = knn_graph(X, 5, metric="cosine", threads=1)
        parallel = knn_graph(X, 5, metric="cosine", threads=3)
        assert np.array_equal(serial.indices, parallel.indices)
        assert np.array_equal(serial.distances, parallel.distances)

    def test_cosine_matches_definition(self):
        X = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
        graph = knn_graph(X, 2, metric="cosine")
        # same-direction vectors sit at distance 0, orthogonal at 1
        assert graph.indices[0, 0] == 1
        assert graph.distances[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert graph.distances[0, 1] == pytest.approx(1.0, abs=1e-12)


def _bisect_sigma(distances, k):
    """Scalar-math reimplementation of the calibration contract."""
    positive = [d for d in distances if d > 0]
    rho = positive[0] if positive else 0.0
    target = math.log2(k)
    lo, hi, mid = 0.0, math.inf, 1.0
    for _ in range(64):
        total = sum(math.exp(-max(0.0, d - rho) / mid) for d in distances)
        if abs(total - target) < 1e-5:
            break
        if total > target:
            hi = mid
            mid = (lo + hi) / 2.0
        else:
            lo = mid
            mid = mid * 2.0 if math.isinf(hi) else (lo + hi) / 2.0
    clamp = 1e-3 * sum(distances) / len(distances)
    return rho, max(mid, clamp)


class TestSmoothKnnCalibrate:
    def test_all_equal_distances_hit_clamp(self):
        rho, sigma = smooth_knn_calibrate([2.0, 2.0, 2.0], 3)
        assert rho == 2.0
        assert sigma == pytest.approx(1e-3 * 2.0)
        for d in (2.0, 2.0, 2.0):
            assert membership_strength(d, rho, sigma) == 1.0

    def test_matches_bisection_oracle(self):
        rows = [
            ([1.0, 2.0], 2),
            ([1.0, 1.5, 2.0, 3.0], 4),
            ([0.5, 0.9, 1.0, 1.4, 2.0], 5),
            ([0.0, 0.0, 1.0, 4.0], 4),
        ]
        for distances, k in rows:
            rho, sigma = smooth_knn_calibrate(distances, k)
            oracle_rho, oracle_sigma = _bisect_sigma(distances, k)
            assert rho == oracle_rho
            assert sigma == pytest.approx(oracle_sigma, rel=1e-12)

    def test_feasible_rows_reach_target(self):
        # independent root via brentq on the monotone membership sum
        rng = np.random.default_rng(12)
        for _ in range(25):
            k = int(rng.integers(3, 12))
            d = np.sort(rng.uniform(0.1, 3.0, size=k))
            target = math.log2(k)

            def gap(sigma):
                return float(np.exp(-np.maximum(d - d[0], 0.0) / sigma).sum()) - target

            rho, sigma = smooth_knn_calibrate(d, k)
            achieved = float(np.exp(-np.maximum(d - rho, 0.0) / sigma).sum())
            assert abs(achieved - target) <= 1e-4
            root = brentq(gap, 1e-12, 1e9, xtol=1e-12)
            assert sigma == pytest.approx(root, rel=1e-3)

    def test_single_neighbor(self):
        rho, sigma = smooth_knn_calibrate([0.7], 1)
        assert rho == 0.7
        assert membership_strength(0.7, rho, sigma) == 1.0

    def test_duplicate_only_row(self):
        rho, sigma = smooth_knn_calibrate([0.0, 0.0], 2)
        assert rho == 0.0
        assert membership_strength(0.0, rho, sigma) == 1.0

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            smooth_knn_calibrate([1.0, 2.0], 3)


class TestFuzzySimplicialSet:
    def test_union_with_certain_edge(self):
        assert probabilistic_union(1.0, 0.0) == 1.0

    def test_union_of_halves(self):
        assert probabilistic_union(0.5, 0.5) == pytest.approx(0.75)

    def test_union_formula_on_symmetric_matrices(self):
        # on symmetric a the union a + a^T - a o a^T equals 2a - a^2
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.uniform(0.0, 1.0, size=(6, 6))
            a = (a + a.T) / 2.0
            union = a + a.T - a * a.T
            assert np.allclose(union, 2.0 * a - a**2)
            assert np.allclose(union, union.T)

    def test_symmetry_weights_and_no_self_loops(self):
        rng = np.random.default_rng(4)
        for trial in range(10):
            X = rng.normal(size=(rng.integers(8, 30), rng.integers(2, 6)))
            graph = fuzzy_simplicial_set(knn_graph(X, 4, metric="euclidean"))
            for (i, j), w in graph.edges.items():
                assert i != j
                assert 0.0 < w <= 1.0
                assert graph.edges[(j, i)] == w

    def test_recomputation_is_deterministic(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(20, 3))
        knn = knn_graph(X, 5, metric="euclidean")
        first = fuzzy_simplicial_set(knn)
        second = fuzzy_simplicial_set(knn)
        assert first.edges == second.edges

    def test_nearest_neighbor_edge_has_weight_one(self):
        # the smallest positive neighbor distance equals rho, so the
        # directed membership toward that neighbor is exactly 1
        rng = np.random.default_rng(11)
        X = rng.normal(size=(15, 3))
        knn = knn_graph(X, 4, metric="euclidean")
        graph = fuzzy_simplicial_set(knn)
        for i in range(15):
            nearest = int(knn.indices[i, 0])
            assert graph.weight(i, nearest) == 1.0


def _oracle_kernel_fit(min_dist, spread):
    """Independent least squares: coarse log-grid search plus
    multiplicative coordinate descent, no scipy optimizer involved."""
    grid = np.linspace(0.0, 3.0 * spread, 300)
    target = np.where(grid <= min_dist, 1.0, np.exp(-(grid - min_dist) / spread))

    def sse(a, b):
        with np.errstate(over="ignore"):
            pred = 1.0 / (1.0 + a * grid ** (2.0 * b))
        return float(((pred - target) ** 2).sum())

    best = (math.inf, 1.0, 1.0)
    for a in np.geomspace(0.05, 20.0, 50):
        for b in np.geomspace(0.2, 3.0, 50):
            err = sse(a, b)
            if err < best[0]:
                best = (err, a, b)
    _, a, b = best
    step = 0.3
    while step > 1e-7:
        improved = False
        for factor_a, factor_b in ((1 + step, 1), (1 - step, 1), (1, 1 + step), (1, 1 - step)):
            na, nb = a * factor_a, b * factor_b
            if na <= 0 or nb <= 0:
                continue
            err = sse(na, nb)
            if err < best[0]:
                best = (err, na, nb)
                a, b = na, nb
                improved = True
        if not improved:
            step /= 2.0
    return a, b


class TestCurveFit:
    def test_default_parameters_match_oracle(self):
        params = fit_curve_params(0.1, 1.0)
        oracle_a, oracle_b = _oracle_kernel_fit(0.1, 1.0)
        assert params.a == pytest.approx(oracle_a, rel=0.05)
        assert params.b == pytest.approx(oracle_b, rel=0.05)
        # canonical ballpark for min_dist=0.1, spread=1.0
        assert params.a == pytest.approx(1.58, abs=0.05)
        assert params.b == pytest.approx(0.90, abs=0.05)

    def test_max_deviation_below_bound(self):
        params = fit_curve_params(0.1, 1.0)
        grid = curve_fit_grid(1.0)
        fitted = 1.0 / (1.0 + params.a * grid ** (2.0 * params.b))
        deviation = np.abs(fitted - target_membership(grid, 0.1, 1.0)).max()
        assert deviation < 0.08

    def test_kernel_is_one_at_zero_distance(self):
        params = fit_curve_params(0.0, 1.0)
        assert 1.0 / (1.0 + params.a * 0.0 ** (2.0 * params.b)) == 1.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            fit_curve_params(0.1, 0.0)
        with pytest.raises(ValueError):
            fit_curve_params(3.0, 1.0)


def _two_component_graph() -> FuzzyGraph:
    edges = {}
    for block in (range(4), range(4, 8)):
        for i in block:
            for j in block:
                if i != j:
                    edges[(i, j)] = 1.0
    return FuzzyGraph(n=8, edges=edges)


class TestInitializeLayout:
    def test_random_mode_is_seeded_and_bounded(self):
        graph = _two_component_graph()
        first = initialize_layout(graph, 2, seed=1, mode="random")
        second = initialize_layout(graph, 2, seed=1, mode="random")
        assert np.array_equal(first, second)
        assert np.all(np.abs(first) <= 10.0)

    def test_disconnected_graph_falls_back_to_random(self, caplog):
        graph = _two_component_graph()
        with caplog.at_level(logging.WARNING):
            layout = initialize_layout(graph, 2, seed=1, mode="spectral")
        assert "fell back to random" in caplog.text
        assert np.array_equal(layout, initialize_layout(graph, 2, seed=1, mode="random"))

    def test_spectral_on_connected_graph(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(20, 3))
        graph = fuzzy_simplicial_set(knn_graph(X, 6, metric="euclidean"))
        layout = initialize_layout(graph, 2, seed=0, mode="spectral")
        assert layout.shape == (20, 2)
        assert np.all(np.isfinite(layout))
        assert np.abs(layout).max() == pytest.approx(10.0)
        again = initialize_layout(graph, 2, seed=0, mode="spectral")
        assert np.array_equal(layout, again)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            initialize_layout(_two_component_graph(), 2, seed=0, mode="pca")


class TestOptimizeLayout:
    def _params(self):
        return CurveParams(a=1.58, b=0.9, min_dist=0.1, spread=1.0)

    def test_single_node_unchanged(self):
        graph = FuzzyGraph(n=1, edges={})
        init = np.array([[3.0, -4.0]])
        out = optimize_layout(graph, init, self._params(), epochs=10)
        assert np.array_equal(out, init)

    def test_single_thread_is_deterministic(self):
        graph = _two_component_graph()
        rng = np.random.default_rng(0)
        init = rng.uniform(-10, 10, size=(8, 2))
        first = optimize_layout(graph, init, self._params(), epochs=50, seed=7)
        second = optimize_layout(graph, init, self._params(), epochs=50, seed=7)
        assert np.array_equal(first, second)

    def test_two_blobs_separate(self):
        edges = {}
        for block in (range(10), range(10, 20)):
            for i in block:
                for j in block:
                    if i != j:
                        edges[(i, j)] = 1.0
        graph = FuzzyGraph(n=20, edges=edges)
        rng = np.random.default_rng(0)
        init = rng.uniform(-10, 10, size=(20, 2))
        out = optimize_layout(graph, init, self._params(), epochs=200, seed=3)
        first, second = out[:10], out[10:]
        inter = np.linalg.norm(first.mean(axis=0) - second.mean(axis=0))
        intra = max(
            np.linalg.norm(blob[i] - blob[j])
            for blob in (first, second)
            for i in range(len(blob))
            for j in range(len(blob))
        )
        assert inter > intra

    def test_outputs_finite_for_any_epoch_count(self):
        graph = _two_component_graph()
        rng = np.random.default_rng(1)
        init = rng.uniform(-10, 10, size=(8, 2))
        for epochs in (1, 3, 17, 120):
            out = optimize_layout(graph, init, self._params(), epochs=epochs, seed=2)
            assert np.all(np.isfinite(out))

    def test_parallel_mode_finite(self):
        graph = _two_component_graph()
        rng = np.random.default_rng(1)
        init = rng.uniform(-10, 10, size=(8, 2))
        out = optimize_layout(graph, init, self._params(), epochs=40, seed=2, threads=2)
        assert np.all(np.isfinite(out))

    def test_argument_validation(self):
        graph = _two_component_graph()
        init = np.zeros((8, 2))
        with pytest.raises(ValueError):
            optimize_layout(graph, init, self._params(), epochs=0)
        with pytest.raises(ValueError):
            optimize_layout(graph, init, self._params(), neg_samples=0)


class TestReduceEmbeddings:
    def test_output_shape(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(40, 16)).astype(np.float32)
        layout = reduce_embeddings(X, n_neighbors=5, epochs=20, seed=1)
        assert layout.shape == (40, 2)
        assert np.all(np.isfinite(layout))

    def test_k_not_below_rows_rejected(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(10, 4))
        with pytest.raises(ValueError):
            reduce_embeddings(X, n_neighbors=15)

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(15)
        X = rng.normal(size=(30, 8)).astype(np.float32)
        first = reduce_embeddings(X, n_neighbors=5, epochs=25, seed=4)
        second = reduce_embeddings(X, n_neighbors=5, epochs=25, seed=4)
        assert np.array_equal(first, second)

    def test_blob_recovery_small(self):
        # compact version of the structure-preservation experiment
        from sklearn.metrics import adjusted_rand_score

        from topicforge import best_of_restarts

        rng = np.random.default_rng(21)
        centers = rng.normal(size=(3, 20)) * 8
        X = np.vstack([c + rng.normal(size=(40, 20)) for c in centers])
        labels = np.repeat(np.arange(3), 40)
        layout = reduce_embeddings(X, n_neighbors=10, epochs=80, seed=5)
        model = best_of_restarts(layout, 3, restarts=10, seed=6)
        assert adjusted_rand_score(labels, model.assignments) >= 0.9

import numpy as np
import pytest
from sklearn.base import clone

from gspkit import (SensorGraphBuilder, SignalMatrix, SimilarityKind,
                    build_graph, dtw_distance, pearson_correlation,
                    similarity_matrix, top_k_selections)
from gspkit.errors import (EmptySeriesError, LengthMismatchError,
                           ZeroVarianceError)


def brute_force_dtw(x, y):
    """Enumerate every monotone boundary-matched warping path (tiny inputs)."""
    n, m = len(x), len(y)
    best = [np.inf]

    def walk(i, j, cost):
        cost += abs(x[i] - y[j])
        if cost >= best[0]:
            return
        if i == n - 1 and j == m - 1:
            best[0] = cost
            return
        if i + 1 < n:
            walk(i + 1, j, cost)
        if j + 1 < m:
            walk(i, j + 1, cost)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, cost)

    walk(0, 0, 0.0)
    return best[0]


class TestPearson:
    def test_identical_series(self):
        assert pearson_correlation([1, 2, 3, 1], [1, 2, 3, 1]) == pytest.approx(1.0)

    def test_anti_correlation(self):
        x = np.array([0.5, -1.0, 2.0, 0.0])
        assert pearson_correlation(x, -x) == pytest.approx(-1.0)

    def test_against_raw_sum_formula(self):
        x, y = [1.0, 2.0, 3.0], [1.0, 2.0, 4.0]
        n = 3
        sx, sy = sum(x), sum(y)
        sxx = sum(v * v for v in x)
        syy = sum(v * v for v in y)
        sxy = sum(a * b for a, b in zip(x, y))
        expected = ((n * sxy - sx * sy)
                    / np.sqrt((n * sxx - sx ** 2) * (n * syy - sy ** 2)))
        assert pearson_correlation(x, y) == pytest.approx(expected, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(ZeroVarianceError):
            pearson_correlation([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            pearson_correlation([1, 2], [1, 2, 3])


class TestDtw:
    def test_self_distance_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.normal(size=int(rng.integers(1, 20)))
            assert dtw_distance(x, x) == 0.0

    def test_small_case_matches_path_enumeration(self):
        assert dtw_distance([0, 0, 1], [0, 1]) == 0.0
        assert brute_force_dtw([0, 0, 1], [0, 1]) == 0.0

    def test_random_small_cases_match_path_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            x = rng.integers(-3, 4, size=int(rng.integers(1, 6))).astype(float)
            y = rng.integers(-3, 4, size=int(rng.integers(1, 6))).astype(float)
            assert dtw_distance(x, y) == pytest.approx(brute_force_dtw(x, y),
                                                       abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            x = rng.normal(size=8)
            y = rng.normal(size=11)
            assert dtw_distance(x, y) == pytest.approx(dtw_distance(y, x),
                                                       abs=1e-12)

    def test_bounded_by_elementwise_l1(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = rng.normal(size=9)
            y = rng.normal(size=9)
            assert dtw_distance(x, y) <= np.abs(x - y).sum() + 1e-12

    def test_empty_series(self):
        with pytest.raises(EmptySeriesError):
            dtw_distance([], [1.0])


class TestSimilarityMatrix:
    def test_correlation_diagonal_and_symmetry(self):
        rng = np.random.default_rng(4)
        sim = similarity_matrix(rng.normal(size=(5, 30)), "correlation")
        assert np.allclose(np.diag(sim.scores), 1.0)
        assert np.allclose(sim.scores, sim.scores.T)

    def test_dtw_diagonal(self):
        rng = np.random.default_rng(5)
        sim = similarity_matrix(rng.normal(size=(4, 12)), "dtw")
        assert np.allclose(np.diag(sim.scores), 0.0)
        assert np.all(sim.scores >= 0.0)

    def test_error_tagged_with_sensor_ids(self):
        sm = SignalMatrix(values=[[1, 1, 1], [1, 2, 3]],
                          sensor_ids=("flat", "ok"))
        with pytest.raises(ZeroVarianceError, match="flat"):
            similarity_matrix(sm, "correlation")


class TestBuildGraph:
    @pytest.mark.parametrize("n,expected", [(42, 126), (37, 111), (79, 237)])
    def test_selection_counts_match_k_times_n(self, n, expected):
        rng = np.random.default_rng(n)
        signals = rng.normal(size=(n, 40))
        sim = similarity_matrix(signals, "correlation")
        assert len(top_k_selections(sim, 3)) == expected

    def test_three_nodes_k3_clips_to_triangle(self):
        rng = np.random.default_rng(6)
        g = build_graph(rng.normal(size=(3, 25)), "correlation", 3)
        assert len(g.edges()) == 3

    def test_output_invariants_and_degree(self):
        rng = np.random.default_rng(7)
        for kind in ("correlation", "dtw"):
            g = build_graph(rng.normal(size=(10, 40)), kind, 3)
            assert np.allclose(g.weights, g.weights.T)
            assert np.all(np.diag(g.weights) == 0)
            assert np.all(g.weights >= 0)
            degrees = (g.weights > 0).sum(axis=1)
            assert np.all(degrees >= 3)
            n_edges = len(g.edges())
            assert 3 * 10 / 2 <= n_edges <= 3 * 10

    def test_edge_weights_are_affinities(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        signals = np.stack([x, -x, x + 0.1 * np.array([1, -1, 1, -1.0])])
        g = build_graph(signals, "correlation", 1)
        # sensors 0 and 1 are perfectly anti-correlated: affinity |r| = 1
        assert g.weights[0, 1] == pytest.approx(1.0)

    def test_dtw_affinity_transform(self):
        signals = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 1.0], [5.0, 6.0, 7.0]])
        g = build_graph(signals, "dtw", 1)
        d01 = dtw_distance(signals[0], signals[1])
        assert g.weights[0, 1] == pytest.approx(1.0 / (1.0 + d01))


class TestSensorGraphBuilder:
    def test_fit_matches_build_graph(self):
        rng = np.random.default_rng(8)
        signals = rng.normal(size=(6, 50))             # (sensors, steps)
        builder = SensorGraphBuilder(metric="correlation", top_k=3)
        builder.fit(signals.T)                         # estimator sees (T, N)
        assert np.array_equal(builder.graph_.weights,
                              build_graph(signals, "correlation", 3).weights)
        assert builder.n_selections_ == 6 * 3

    def test_sklearn_params_and_clone(self):
        builder = SensorGraphBuilder(metric="dtw", top_k=2)
        params = builder.get_params()
        assert params == {"metric": "dtw", "top_k": 2}
        cloned = clone(builder)
        assert cloned.get_params() == params

    def test_signed_scores_retained(self):
        x = np.linspace(0, 1, 20)
        signals = np.stack([x, -x])
        builder = SensorGraphBuilder(top_k=1).fit(signals.T)
        assert builder.similarity_.scores[0, 1] == pytest.approx(-1.0)
        assert builder.graph_.weights[0, 1] == pytest.approx(1.0)

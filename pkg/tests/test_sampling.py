import itertools

import numpy as np
import pytest
from sklearn.base import clone

from gspkit import (MaskObjective, SampleMask, SearchConfig, SensorGraph,
                    SensorSubsetSelector, bottom_up, build_graph,
                    evaluate_mask, laplacian, random_search, run_search,
                    top_down)
from gspkit.errors import BudgetTooLargeError, SingularSystemError
from gspkit.sampling import restart_seed
from gspkit.signals import window_steps
from gspkit.spectral import basis_for, apply_filter, lowpass


def naive_evaluate(g, signals, windows, mask, filtered=False, tau=0.0):
    """Straight-line reimplementation: per-column solve, no caching."""
    values = np.asarray(signals, dtype=float)
    if filtered:
        values = apply_filter(basis_for(g), values, lowpass(0.5))
    lap = laplacian(g)
    sel = mask.selected
    uns = ~sel
    cols = window_steps(windows, values.shape[1])
    errors = []
    for j in cols:
        y = values[sel, j]
        x = np.zeros(g.n)
        x[sel] = y
        if uns.any():
            if tau == 0.0:
                x[uns] = np.linalg.solve(lap[np.ix_(uns, uns)],
                                         -lap[np.ix_(uns, sel)] @ y)
            else:
                rhs = np.zeros(g.n)
                rhs[sel] = y
                x = np.linalg.solve(np.diag(sel.astype(float)) + tau * lap, rhs)
        errors.append(values[:, j] - x)
    return float(np.sqrt(np.mean(np.square(errors))))


@pytest.fixture
def small_instance():
    """5 sensors on a chain graph with structured signals."""
    rng = np.random.default_rng(30)
    t = np.linspace(0, 8 * np.pi, 120)
    base = np.sin(t)
    signals = np.stack([base,
                        0.8 * base + 0.1 * rng.normal(size=t.size),
                        -0.9 * base + 0.1 * rng.normal(size=t.size),
                        np.cos(t),
                        0.7 * np.cos(t) + 0.1 * rng.normal(size=t.size)])
    g = build_graph(signals, "correlation", 2)
    windows = [(10, 60), (80, 110)]
    return g, signals, windows


class TestEvaluateMask:
    def test_full_mask_is_exact(self, small_instance):
        g, signals, windows = small_instance
        mask = SampleMask.from_indices(range(5), 5)
        assert evaluate_mask(g, signals, windows, mask) == 0.0

    def test_agrees_with_naive_reimplementation(self, small_instance):
        g, signals, windows = small_instance
        rng = np.random.default_rng(31)
        for _ in range(10):
            count = int(rng.integers(1, 5))
            mask = SampleMask.from_indices(
                rng.choice(5, size=count, replace=False), 5)
            for filtered in (False, True):
                ours = evaluate_mask(g, signals, windows, mask,
                                     filtered=filtered)
                naive = naive_evaluate(g, signals, windows, mask,
                                       filtered=filtered)
                assert ours == pytest.approx(naive, abs=1e-10)

    def test_positive_tau_agrees_with_naive(self, small_instance):
        g, signals, windows = small_instance
        mask = SampleMask.from_indices([0, 3], 5)
        ours = evaluate_mask(g, signals, windows, mask, tau=0.5)
        assert ours == pytest.approx(
            naive_evaluate(g, signals, windows, mask, tau=0.5), abs=1e-10)

    def test_disconnected_component_raises_with_diagnostics(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0
        g = SensorGraph(node_ids=("a", "b", "c", "d"), weights=w)
        signals = np.random.default_rng(32).normal(size=(4, 30))
        mask = SampleMask.from_indices([0, 1], 4)
        with pytest.raises(SingularSystemError, match="c"):
            evaluate_mask(g, signals, [(0, 30)], mask)


class TestRandomSearch:
    def test_finds_optimum_on_tiny_space(self):
        # sensor 3 duplicates sensor 2: the best 3-subset drops a duplicate
        rng = np.random.default_rng(33)
        t = np.linspace(0, 6 * np.pi, 90)
        signals = np.stack([np.sin(t), np.cos(t),
                            np.sin(2 * t), np.sin(2 * t)])
        g = build_graph(signals, "correlation", 2)
        windows = [(0, 90)]
        cfg = SearchConfig(budget_fraction=0.75, iterations=30, rng_seed=5)
        result = random_search(g, signals, windows, cfg)
        objective = MaskObjective(g, signals, windows)
        best = min(
            objective.rmse_or_inf(SampleMask.from_indices(c, 4, budget=3))
            for c in itertools.combinations(range(4), 3))
        assert result.rmse == pytest.approx(best, abs=1e-12)
        assert {2, 3} - set(result.mask.indices)  # one duplicate excluded

    def test_single_possible_subset(self):
        t = np.linspace(0, 4 * np.pi, 60)
        signals = np.stack([np.sin(t), np.sin(t)])
        g = build_graph(signals, "correlation", 1)
        cfg = SearchConfig(budget_fraction=0.5, iterations=5, rng_seed=0)
        result = random_search(g, signals, [(0, 60)], cfg)
        assert result.mask.count == 1

    def test_deterministic_under_seed(self, small_instance):
        g, signals, windows = small_instance
        cfg = SearchConfig(iterations=12, rng_seed=99)
        a = random_search(g, signals, windows, cfg)
        b = random_search(g, signals, windows, cfg)
        assert a.rmse == b.rmse
        assert np.array_equal(a.mask.selected, b.mask.selected)
        assert a.iteration_trace == b.iteration_trace

    def test_budget_too_large(self, small_instance):
        g, signals, windows = small_instance
        with pytest.raises(BudgetTooLargeError):
            random_search(g, signals, windows,
                          SearchConfig(budget_fraction=1.0, iterations=3))


class TestHillClimbers:
    def test_bottom_up_adds_dominant_sensor_first(self):
        # sensor 0 drives everything; all others are noisy copies of it
        rng = np.random.default_rng(34)
        t = np.linspace(0, 6 * np.pi, 100)
        base = np.sin(t)
        signals = np.stack([base] + [
            (0.9 - 0.1 * k) * base + 0.3 * rng.normal(size=t.size)
            for k in range(4)])
        g = build_graph(signals, "correlation", 2)
        windows = [(0, 100)]
        objective = MaskObjective(g, signals, windows)
        singles = sorted(
            (objective.rmse_or_inf(SampleMask.from_indices([i], 5)), i)
            for i in range(5))
        # exhaustive first-step scoring: sensor 0 strictly beats the 4th rank
        assert singles[0][1] == 0
        assert singles[0][0] < singles[3][0] - 1e-12
        cfg = SearchConfig(budget_fraction=0.4, iterations=8, rng_seed=1,
                           top_pool=3)
        result = bottom_up(g, signals, windows, cfg)
        assert 0 in result.mask.indices

    def test_budget_one_picks_among_top3_singles(self, small_instance):
        g, signals, windows = small_instance
        objective = MaskObjective(g, signals, windows)
        singles = sorted(
            (objective.rmse_or_inf(SampleMask.from_indices([i], 5)), i)
            for i in range(5))
        top3 = {i for _, i in singles[:3]}
        cfg = SearchConfig(budget_fraction=0.2, iterations=6, rng_seed=2)
        result = bottom_up(g, signals, windows, cfg)
        assert set(result.mask.indices) <= top3

    def test_top_down_eliminates_uninformative_sensor(self):
        # sensor 4 is constant zero and sits between anti-correlated
        # neighbors whose average is ~0, so dropping it costs nothing
        t = np.linspace(0, 6 * np.pi, 100)
        signals = np.stack([np.sin(t), -np.sin(t), np.cos(t), -np.cos(t),
                            np.zeros_like(t)])
        w = np.zeros((5, 5))
        for i, j in [(0, 1), (2, 3), (0, 2), (1, 3), (0, 4), (1, 4)]:
            w[i, j] = w[j, i] = 1.0
        g = SensorGraph(node_ids=tuple("abcde"), weights=w)
        windows = [(0, 100)]
        # exhaustive first-step removal scoring: dropping 4 ranks top-3
        objective = MaskObjective(g, signals, windows)
        removals = sorted(
            (objective.rmse_or_inf(
                SampleMask.from_indices(sorted(set(range(5)) - {i}), 5)), i)
            for i in range(5))
        assert 4 in {i for _, i in removals[:3]}
        cfg = SearchConfig(budget_fraction=0.4, iterations=10, rng_seed=3)
        result = top_down(g, signals, windows, cfg)
        assert 4 not in result.mask.indices

    def test_top_down_steps_per_restart(self, small_instance):
        g, signals, windows = small_instance
        cfg = SearchConfig(budget_fraction=0.4, iterations=4, rng_seed=4)
        result = top_down(g, signals, windows, cfg)
        assert result.steps_per_restart == 5 - 2
        assert len(result.iteration_trace) == 4

    def test_two_nodes_budget_one(self):
        t = np.linspace(0, 4 * np.pi, 60)
        signals = np.stack([np.sin(t), 0.5 * np.sin(t)])
        g = build_graph(signals, "correlation", 1)
        cfg = SearchConfig(budget_fraction=0.5, iterations=4, rng_seed=0)
        result = top_down(g, signals, [(0, 60)], cfg)
        assert result.mask.count == 1

    def test_deterministic_under_seed(self, small_instance):
        g, signals, windows = small_instance
        cfg = SearchConfig(iterations=6, rng_seed=7)
        for algo in (bottom_up, top_down):
            a = algo(g, signals, windows, cfg)
            b = algo(g, signals, windows, cfg)
            assert a.rmse == b.rmse
            assert np.array_equal(a.mask.selected, b.mask.selected)


class TestSearchInvariants:
    @pytest.mark.parametrize("algo", ["random", "bottom_up", "top_down"])
    def test_returned_rmse_matches_fresh_evaluation(self, small_instance, algo):
        g, signals, windows = small_instance
        cfg = SearchConfig(iterations=8, rng_seed=11)
        result = run_search(algo, g, signals, windows, cfg)
        fresh = evaluate_mask(g, signals, windows, result.mask)
        assert result.rmse == fresh  # exact: no stale caching

    @pytest.mark.parametrize("algo", ["random", "bottom_up", "top_down"])
    def test_trace_monotone_non_increasing(self, small_instance, algo):
        g, signals, windows = small_instance
        cfg = SearchConfig(iterations=10, rng_seed=12)
        result = run_search(algo, g, signals, windows, cfg)
        best_values = [r for _, r in result.iteration_trace]
        assert all(b <= a for a, b in zip(best_values, best_values[1:]))
        assert len(result.iteration_seconds) == len(result.iteration_trace)

    def test_restart_seed_rule(self):
        assert restart_seed(0, 0) == 0
        assert restart_seed(123, 0) == 123
        assert restart_seed(0, 1) == 0x9E3779B97F4A7C15
        assert restart_seed(0, 2) == (2 * 0x9E3779B97F4A7C15) % (1 << 64)
        assert restart_seed(5, 3) == 5 ^ ((3 * 0x9E3779B97F4A7C15) % (1 << 64))


class TestSensorSubsetSelector:
    def test_fit_transform_inverse(self, small_instance):
        g, signals, windows = small_instance
        sel = SensorSubsetSelector(graph=g, algorithm="top_down",
                                   budget_fraction=0.4, iterations=5,
                                   windows=windows, random_state=0)
        X = signals.T  # (timesteps, sensors)
        sel.fit(X)
        kept = sel.transform(X)
        assert kept.shape == (X.shape[0], 2)
        rebuilt = sel.inverse_transform(kept)
        assert rebuilt.shape == X.shape
        # sampled columns come back exactly at tau=0
        assert np.allclose(rebuilt[:, sel.get_support()], kept, atol=1e-12)
        assert sel.rmse_ == pytest.approx(
            evaluate_mask(g, signals, windows, sel.mask_))

    def test_clone_round_trip(self, small_instance):
        g, _, windows = small_instance
        sel = SensorSubsetSelector(graph=g, algorithm="random", iterations=3,
                                   windows=windows)
        assert clone(sel).get_params()["algorithm"] == "random"

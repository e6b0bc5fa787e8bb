"""Search for a minimal sensor subset that reconstructs the full signal.

Three strategies share one objective (event-window reconstruction RMSE):

* random search — best of many uniformly drawn budget-size subsets;
* bottom-up hill climbing — forward selection from the empty mask;
* top-down hill climbing — backward elimination from the full mask.

Both climbers rank candidate moves by resulting RMSE and pick uniformly at
random among the best ``top_pool`` moves, which keeps single climbs cheap
while letting restarts escape local optima. Restarts are independent: the
restart rng seed is rng_seed XOR i*0x9E3779B97F4A7C15 (mod 2^64), so they
can be distributed without changing results.
"""

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.feature_selection import SelectorMixin

from .errors import BudgetTooLargeError, SingularSystemError
from .graph import SensorGraph
from .reconstruct import MaskFactorization, SampleMask
from .signals import SignalMatrix, as_signal_values, window_steps
from .spectral import apply_filter, basis_for, lowpass

_SEED_STRIDE = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def restart_seed(rng_seed: int, restart: int) -> int:
    """Per-restart seed splitting rule (stable contract for parallel runs)."""
    return (int(rng_seed) ^ ((restart * _SEED_STRIDE) & _MASK64)) & _MASK64


class SearchAlgorithm(str, Enum):
    RANDOM = "random"
    BOTTOM_UP = "bottom_up"
    TOP_DOWN = "top_down"


@dataclass(frozen=True)
class SearchConfig:
    budget_fraction: float = 0.25
    iterations: int = 500
    top_pool: int = 3
    rng_seed: int = 0
    filtered: bool = False
    filter_alpha: float = 0.5
    tau: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.budget_fraction <= 1.0:
            raise ValueError("budget_fraction must be in (0, 1]")
        if self.iterations < 1 or self.top_pool < 1:
            raise ValueError("iterations and top_pool must be >= 1")

    def budget_for(self, n: int) -> int:
        return max(1, math.ceil(self.budget_fraction * n))


@dataclass
class SearchResult:
    mask: SampleMask
    rmse: float
    algorithm: SearchAlgorithm
    iteration_trace: list = field(default_factory=list)
    iteration_seconds: list = field(default_factory=list)
    steps_per_restart: int = 0
    evaluations: int = 0

    def to_json_dict(self, node_ids=None):
        return {
            "algorithm": self.algorithm.value,
            "rmse": self.rmse,
            "mask": self.mask.to_json_dict(node_ids),
            "trace": [[int(i), float(r)] for i, r in self.iteration_trace],
            "iteration_seconds": [float(s) for s in self.iteration_seconds],
            "steps_per_restart": self.steps_per_restart,
            "evaluations": self.evaluations,
        }


class MaskObjective:
    """Shared, memoized objective: mask -> event-window reconstruction RMSE.

    The signal matrix is optionally low-pass filtered once up front (the
    filtered evaluation mode samples and scores the filtered signals), and
    only the event-window columns are reconstructed — per-column solves are
    independent, so restricting to scored columns is exact.
    """

    def __init__(self, g: SensorGraph, signals, windows, filtered=False,
                 tau=0.0, filter_alpha=0.5):
        values = as_signal_values(signals)
        if values.shape[0] != g.n:
            raise ValueError(f"{values.shape[0]} sensor rows for {g.n} nodes")
        if filtered:
            values = apply_filter(basis_for(g), values, lowpass(filter_alpha))
        self.graph = g
        self.tau = float(tau)
        cols = window_steps(windows, n_steps=values.shape[1])
        self.target = values[:, cols]
        self._cache = {}
        self.evaluations = 0

    def key(self, mask: SampleMask):
        return tuple(int(i) for i in mask.indices)

    def rmse(self, mask: SampleMask) -> float:
        """RMSE for this mask; raises SingularSystemError when infeasible."""
        k = self.key(mask)
        if k not in self._cache:
            factor = MaskFactorization(self.graph, mask, self.tau)
            recon = factor.solve(self.target[mask.selected])
            diff = self.target - recon
            self._cache[k] = float(np.sqrt(np.mean(diff ** 2)))
            self.evaluations += 1
        return self._cache[k]

    def rmse_or_inf(self, mask: SampleMask) -> float:
        """Like :meth:`rmse` but scores infeasible masks as +inf so climbers
        can step around components that temporarily lack samples."""
        try:
            return self.rmse(mask)
        except SingularSystemError:
            return math.inf


def evaluate_mask(g, signals, windows, mask, filtered=False, tau=0.0,
                  filter_alpha=0.5) -> float:
    """One-off objective evaluation (no caching across calls)."""
    return MaskObjective(g, signals, windows, filtered=filtered, tau=tau,
                         filter_alpha=filter_alpha).rmse(mask)


def _check_budget(n, budget):
    if budget >= n:
        raise BudgetTooLargeError(
            f"budget {budget} must be smaller than the node count {n}")


def random_search(g, signals, windows, cfg: SearchConfig) -> SearchResult:
    """Best of cfg.iterations uniformly random budget-size subsets."""
    objective = MaskObjective(g, signals, windows, cfg.filtered, cfg.tau,
                              cfg.filter_alpha)
    n = g.n
    budget = cfg.budget_for(n)
    _check_budget(n, budget)

    best_mask, best_rmse = None, math.inf
    trace, seconds, seen = [], [], set()
    for it in range(cfg.iterations):
        t0 = time.perf_counter()
        rng = np.random.Generator(np.random.PCG64(restart_seed(cfg.rng_seed, it)))
        idx = tuple(sorted(int(i) for i in rng.choice(n, size=budget, replace=False)))
        if idx not in seen:
            seen.add(idx)
            mask = SampleMask.from_indices(idx, n, budget=budget)
            r = objective.rmse_or_inf(mask)
            if r < best_rmse:
                best_mask, best_rmse = mask, r
        trace.append((it, best_rmse))
        seconds.append(time.perf_counter() - t0)
    return SearchResult(mask=best_mask, rmse=best_rmse,
                        algorithm=SearchAlgorithm.RANDOM,
                        iteration_trace=trace, iteration_seconds=seconds,
                        steps_per_restart=1, evaluations=objective.evaluations)


def _climb(g, signals, windows, cfg, start_full: bool) -> SearchResult:
    objective = MaskObjective(g, signals, windows, cfg.filtered, cfg.tau,
                              cfg.filter_alpha)
    n = g.n
    budget = cfg.budget_for(n)
    _check_budget(n, budget)
    steps = (n - budget) if start_full else budget
    algorithm = SearchAlgorithm.TOP_DOWN if start_full else SearchAlgorithm.BOTTOM_UP

    best_mask, best_rmse = None, math.inf
    trace, seconds = [], []
    for it in range(cfg.iterations):
        t0 = time.perf_counter()
        rng = np.random.Generator(np.random.PCG64(restart_seed(cfg.rng_seed, it)))
        selected = set(range(n)) if start_full else set()
        for _ in range(steps):
            moves = sorted(set(range(n)) - selected) if not start_full else sorted(selected)
            scored = []
            for node in moves:
                trial = selected | {node} if not start_full else selected - {node}
                mask = SampleMask.from_indices(trial, n, budget=budget)
                scored.append((objective.rmse_or_inf(mask), node))
            scored.sort()  # (rmse, node index): deterministic tie-breaking
            pool = scored[:min(cfg.top_pool, len(scored))]
            _, node = pool[int(rng.integers(len(pool)))]
            selected = selected | {node} if not start_full else selected - {node}
        mask = SampleMask.from_indices(selected, n, budget=budget)
        r = objective.rmse_or_inf(mask)
        if r < best_rmse:
            best_mask, best_rmse = mask, r
        trace.append((it, best_rmse))
        seconds.append(time.perf_counter() - t0)
    return SearchResult(mask=best_mask, rmse=best_rmse, algorithm=algorithm,
                        iteration_trace=trace, iteration_seconds=seconds,
                        steps_per_restart=steps, evaluations=objective.evaluations)


def bottom_up(g, signals, windows, cfg: SearchConfig) -> SearchResult:
    """Forward selection: grow from the empty mask to the budget."""
    return _climb(g, signals, windows, cfg, start_full=False)


def top_down(g, signals, windows, cfg: SearchConfig) -> SearchResult:
    """Backward elimination: shrink from the full mask to the budget."""
    return _climb(g, signals, windows, cfg, start_full=True)


_ALGORITHMS = {
    SearchAlgorithm.RANDOM: random_search,
    SearchAlgorithm.BOTTOM_UP: bottom_up,
    SearchAlgorithm.TOP_DOWN: top_down,
}


def run_search(algorithm, g, signals, windows, cfg: SearchConfig) -> SearchResult:
    return _ALGORITHMS[SearchAlgorithm(algorithm)](g, signals, windows, cfg)


class SensorSubsetSelector(SelectorMixin, BaseEstimator):
    """Feature selector choosing the most informative sensor subset.

    X is (n_timesteps, n_sensors) in graph node order. ``transform`` keeps
    the selected sensor columns, and ``inverse_transform`` rebuilds the full
    network from them by graph reconstruction instead of zero-filling.
    ``windows=None`` scores reconstruction over the whole time axis.
    """

    def __init__(self, graph=None, algorithm="top_down", budget_fraction=0.25,
                 iterations=500, top_pool=3, filtered=False, filter_alpha=0.5,
                 tau=0.0, windows=None, random_state=0):
        self.graph = graph
        self.algorithm = algorithm
        self.budget_fraction = budget_fraction
        self.iterations = iterations
        self.top_pool = top_pool
        self.filtered = filtered
        self.filter_alpha = filter_alpha
        self.tau = tau
        self.windows = windows
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.graph is None:
            raise ValueError("a graph is required")
        signals = X.values if isinstance(X, SignalMatrix) else np.asarray(X, float).T
        windows = self.windows
        if windows is None:
            windows = [(0, signals.shape[1])]
        cfg = SearchConfig(budget_fraction=self.budget_fraction,
                           iterations=self.iterations, top_pool=self.top_pool,
                           rng_seed=self.random_state, filtered=self.filtered,
                           filter_alpha=self.filter_alpha, tau=self.tau)
        self.result_ = run_search(self.algorithm, self.graph, signals,
                                  windows, cfg)
        self.mask_ = self.result_.mask
        self.rmse_ = self.result_.rmse
        self.n_features_in_ = self.graph.n
        return self

    def _get_support_mask(self):
        if not hasattr(self, "mask_"):
            raise NotFittedError("call fit before using the selector")
        return self.mask_.selected

    def inverse_transform(self, X):
        """Tikhonov-reconstruct all sensors from the selected columns."""
        self._get_support_mask()
        X = np.asarray(X, dtype=float)
        factor = MaskFactorization(self.graph, self.mask_, self.tau)
        return factor.solve(X.T).T

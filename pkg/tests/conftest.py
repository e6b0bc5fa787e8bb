import numpy as np
import pytest

from gspkit import (SensorGraph, SignalMatrix, SynthConfig, build_graph,
                    simulate_processed)
from gspkit.dataio import detect_events


@pytest.fixture
def path2():
    return SensorGraph(node_ids=("a", "b"), weights=[[0, 1], [1, 0]])


@pytest.fixture
def path3():
    return SensorGraph(node_ids=("a", "b", "c"),
                       weights=[[0, 1, 0], [1, 0, 1], [0, 1, 0]])


@pytest.fixture
def weighted_triangle():
    # edges: ab=1, ac=2, bc=3
    return SensorGraph(node_ids=("a", "b", "c"),
                       weights=[[0, 1, 2], [1, 0, 3], [2, 3, 0]])


def random_graph(rng, n, p=0.5, weighted=True):
    """Random connected-ish undirected graph (chain backbone + extras)."""
    w = np.zeros((n, n))
    for i in range(n - 1):  # chain keeps it connected
        w[i, i + 1] = w[i + 1, i] = rng.uniform(0.5, 2.0) if weighted else 1.0
    extra = rng.random((n, n)) < p
    for i in range(n):
        for j in range(i + 2, n):
            if extra[i, j]:
                w[i, j] = w[j, i] = rng.uniform(0.1, 2.0) if weighted else 1.0
    return SensorGraph(node_ids=tuple(f"n{i}" for i in range(n)), weights=w)


@pytest.fixture
def make_random_graph():
    return random_graph


# The default synthetic benchmark: one fixed mid-size instance shared by the
# search-quality and forecasting tests. Session-scoped because simulation
# plus graph construction is not free.
BENCHMARK_CONFIG = SynthConfig(n_girder=12, n_deck=12, seed=1)


@pytest.fixture(scope="session")
def benchmark_instance():
    signals, truth = simulate_processed(BENCHMARK_CONFIG)
    graph = build_graph(signals, "correlation", 3)
    events = detect_events(signals)
    return signals, graph, events

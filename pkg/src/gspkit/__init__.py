"""Graph signal processing and forecasting for bridge sensor networks.

The package covers the full pipeline: build a sensor graph from time-series
similarity, analyze signals on it (Fourier basis, filtering, total
variation), reconstruct the whole network from a sampled subset, search for
minimal informative subsets, and forecast per-sensor strain with a
graph-convolution + LSTM model. `gsp --help` exposes everything on the
command line; the estimator classes compose with scikit-learn pipelines.
"""

from .errors import GspError
from .graph import (SensorGraph, SensorKind, degree_matrix, laplacian,
                    normalized_adjacency, connected_components)
from .signals import EventWindow, RawRecording, SignalMatrix
from .similarity import (SimilarityKind, SimilarityMatrix, SensorGraphBuilder,
                         build_graph, dtw_distance, pearson_correlation,
                         similarity_matrix, top_k_selections)
from .spectral import (FilterSpec, GraphLowPassFilter, SpectralBasis,
                       apply_filter, basis_for, decompose, gft, igft,
                       identity_filter, lowpass, total_variation)
from .reconstruct import (MaskFactorization, ReconstructionProblem,
                          SampleMask, TikhonovReconstructor,
                          reconstruct_matrix, reconstruction_rmse,
                          tikhonov_reconstruct)
from .sampling import (MaskObjective, SearchAlgorithm, SearchConfig,
                       SearchResult, SensorSubsetSelector, bottom_up,
                       evaluate_mask, random_search, run_search, top_down)
from .dataio import (SynthConfig, Vehicle, align_by_peaks, detect_events,
                     downsample_mean, simulate_processed, synth_bridge,
                     zscore)
from .tgcn import (TgcnForecaster, TgcnModel, TrainConfig, WindowSet,
                   benchmark_last_value, forecast_rmse, load_model,
                   make_windows, train)

__version__ = "0.1.0"

__all__ = [
    "GspError", "SensorGraph", "SensorKind", "degree_matrix", "laplacian",
    "normalized_adjacency", "connected_components", "EventWindow",
    "RawRecording", "SignalMatrix", "SimilarityKind", "SimilarityMatrix",
    "SensorGraphBuilder", "build_graph", "dtw_distance",
    "pearson_correlation", "similarity_matrix", "top_k_selections",
    "FilterSpec", "GraphLowPassFilter", "SpectralBasis", "apply_filter",
    "basis_for", "decompose", "gft", "igft", "identity_filter", "lowpass",
    "total_variation", "MaskFactorization", "ReconstructionProblem",
    "SampleMask", "TikhonovReconstructor", "reconstruct_matrix",
    "reconstruction_rmse", "tikhonov_reconstruct", "MaskObjective",
    "SearchAlgorithm", "SearchConfig", "SearchResult",
    "SensorSubsetSelector", "bottom_up", "evaluate_mask", "random_search",
    "run_search", "top_down", "SynthConfig", "Vehicle", "align_by_peaks",
    "detect_events", "downsample_mean", "simulate_processed", "synth_bridge",
    "zscore", "TgcnForecaster", "TgcnModel", "TrainConfig", "WindowSet",
    "benchmark_last_value", "forecast_rmse", "load_model", "make_windows",
    "train", "__version__",
]

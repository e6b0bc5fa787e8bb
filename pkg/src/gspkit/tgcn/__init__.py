"""Spatio-temporal strain forecasting: graph convolutions feeding LSTMs.

The model mixes sensor readings over the graph (two graph-convolution
layers), treats the resulting filter channels as a short sequence for two
LSTM layers, and maps the final state through a Tanh dense head to one
prediction per sensor. Everything is plain numpy with hand-written
backpropagation, checked against finite differences in the test suite.
"""

from .windows import WindowSet, make_windows, benchmark_last_value, forecast_rmse
from .layers import GraphConv, Lstm, Dense, Dropout
from .model import TgcnModel, load_model
from .training import TrainConfig, TrainResult, train
from .forecaster import TgcnForecaster

__all__ = [
    "WindowSet", "make_windows", "benchmark_last_value", "forecast_rmse",
    "GraphConv", "Lstm", "Dense", "Dropout",
    "TgcnModel", "load_model", "TrainConfig", "TrainResult", "train",
    "TgcnForecaster",
]

"""sklearn-style wrapper around the forecasting model."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..signals import SignalMatrix, as_signal_values
from ..spectral import basis_for, apply_filter, lowpass
from .model import TgcnModel
from .training import TrainConfig, train
from .windows import benchmark_last_value, forecast_rmse, make_windows


class TgcnForecaster(BaseEstimator, RegressorMixin):
    """Per-sensor strain forecaster over a fixed sensor graph.

    X is (n_timesteps, n_sensors) with columns in graph node order. ``fit``
    cuts sliding windows, optionally low-pass filters the signals over the
    graph first, and trains the model; ``predict`` returns one forecast row
    per complete window of its input.
    """

    def __init__(self, graph=None, in_steps=10, horizon=12, split=0.8,
                 gcn_filters=8, lstm_units=50, dropout_rate=0.2,
                 filtered=False, filter_alpha=0.5, epochs=100, batch_size=32,
                 learning_rate=1e-3, patience=20, random_state=0):
        self.graph = graph
        self.in_steps = in_steps
        self.horizon = horizon
        self.split = split
        self.gcn_filters = gcn_filters
        self.lstm_units = lstm_units
        self.dropout_rate = dropout_rate
        self.filtered = filtered
        self.filter_alpha = filter_alpha
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.patience = patience
        self.random_state = random_state

    def _signals(self, X):
        if isinstance(X, SignalMatrix):
            values = X.values
        else:
            values = np.asarray(X, dtype=float).T
        if values.shape[0] != self.graph.n:
            raise ValueError(f"{values.shape[0]} sensor columns for "
                             f"{self.graph.n} graph nodes")
        if self.filtered:
            values = apply_filter(basis_for(self.graph), values,
                                  lowpass(self.filter_alpha))
        return values

    def fit(self, X, y=None):
        if self.graph is None:
            raise ValueError("a graph is required")
        values = self._signals(X)
        self.windows_ = make_windows(values, in_steps=self.in_steps,
                                     horizon=self.horizon, split=self.split)
        self.model_ = TgcnModel(self.graph, in_steps=self.in_steps,
                                gcn_filters=self.gcn_filters,
                                lstm_units=self.lstm_units,
                                dropout_rate=self.dropout_rate,
                                seed=self.random_state)
        cfg = TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                          learning_rate=self.learning_rate,
                          patience=self.patience, seed=self.random_state)
        self.history_ = train(self.model_, self.windows_, cfg)
        self.n_trainable_params_ = self.model_.trainable_param_count()
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before predicting")

    def predict(self, X):
        """One forecast row (n_sensors,) per complete window in X."""
        self._check_fitted()
        values = self._signals(X)
        ws = make_windows(values, in_steps=self.in_steps,
                          horizon=self.horizon, split=self.split)
        return self.model_.predict(ws.inputs)

    def evaluate(self, on="test") -> dict:
        """Test-split RMSE against the last-value benchmark."""
        self._check_fitted()
        ws = self.windows_
        idx = ws.test_idx if on == "test" else ws.train_idx
        pred = self.model_.predict(ws.inputs[idx])
        bench = benchmark_last_value(ws)[idx]
        targets = ws.targets[idx]
        tgcn = forecast_rmse(pred, targets)
        base = forecast_rmse(bench, targets)
        return {
            "tgcn_rmse": tgcn,
            "benchmark_rmse": base,
            "improvement_pct": 100.0 * (base - tgcn) / base if base > 0 else 0.0,
            "trainable_params": self.n_trainable_params_,
            "ms_per_epoch": self.history_.ms_per_epoch,
        }

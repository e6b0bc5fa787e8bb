"""Cutting signal matrices into supervised forecasting windows."""

from dataclasses import dataclass

import numpy as np

from ..errors import SeriesTooShortError, ShapeMismatchError
from ..signals import as_signal_values


@dataclass(frozen=True)
class WindowSet:
    """Sliding windows over an (N, T) signal matrix.

    ``inputs[w]`` is the (N, in_steps) block starting at timestep w and the
    target is the reading ``horizon`` steps after the last input step. The
    train/test split is chronological: every train window starts before
    every test window.
    """

    inputs: np.ndarray   # (W, N, in_steps)
    targets: np.ndarray  # (W, N)
    train_idx: np.ndarray
    test_idx: np.ndarray
    in_steps: int
    horizon: int

    @property
    def n_windows(self):
        return self.inputs.shape[0]

    @property
    def n_sensors(self):
        return self.inputs.shape[1]


def make_windows(signals, in_steps=10, horizon=12, split=0.8) -> WindowSet:
    """Cut (N, T) signals into T - in_steps - horizon + 1 windows."""
    values = as_signal_values(signals)
    n, t = values.shape
    w = t - in_steps - horizon + 1
    if w < 1:
        raise SeriesTooShortError(
            f"T={t} too short for in_steps={in_steps} + horizon={horizon}")
    inputs = np.empty((w, n, in_steps))
    targets = np.empty((w, n))
    for k in range(w):
        inputs[k] = values[:, k:k + in_steps]
        targets[k] = values[:, k + in_steps - 1 + horizon]
    n_train = int(split * w)
    return WindowSet(inputs=inputs, targets=targets,
                     train_idx=np.arange(n_train),
                     test_idx=np.arange(n_train, w),
                     in_steps=in_steps, horizon=horizon)


def benchmark_last_value(ws: WindowSet) -> np.ndarray:
    """Naive forecast: repeat the most recent observed value per sensor."""
    return ws.inputs[:, :, -1].copy()


def forecast_rmse(predictions, targets) -> float:
    """Pooled RMSE over windows and sensors."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape:
        raise ShapeMismatchError(f"shapes differ: {p.shape} vs {t.shape}")
    return float(np.sqrt(np.mean((p - t) ** 2)))

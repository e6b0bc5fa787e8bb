"""Signal containers shared by every stage of the pipeline.

A :class:`SignalMatrix` holds one value per (sensor, timestep) plus the
per-sensor metadata needed to build graphs and write files. Layout is
(n_sensors, n_steps); sklearn-facing estimators transpose to the
(n_samples, n_features) orientation at their boundary.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalidError, ShapeMismatchError
from .graph import SensorKind, _frozen


@dataclass(frozen=True)
class RawRecording:
    """Per-sensor series at the source sample rate (one row per sensor)."""

    values: np.ndarray
    sample_rate_hz: float
    sensor_ids: tuple
    kinds: tuple = None
    positions: np.ndarray = None
    unit: str = "um/m"

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        ids = tuple(str(i) for i in self.sensor_ids)
        if v.shape[0] != len(ids):
            raise ShapeMismatchError(
                f"{v.shape[0]} series but {len(ids)} sensor ids")
        if not self.sample_rate_hz > 0:
            raise ConfigInvalidError("sample_rate_hz must be > 0")
        kinds = self.kinds or (SensorKind.X_STRAIN,) * len(ids)
        kinds = tuple(SensorKind(k) for k in kinds)
        pos = self.positions
        pos = np.zeros((len(ids), 2)) if pos is None else np.asarray(pos, float)
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "sensor_ids", ids)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "positions", _frozen(pos))

    @property
    def n_sensors(self):
        return self.values.shape[0]

    @property
    def n_samples(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class SignalMatrix:
    """(n_sensors, n_steps) matrix of readings with sensor metadata."""

    values: np.ndarray
    sensor_ids: tuple
    kinds: tuple = None
    positions: np.ndarray = None
    t: np.ndarray = None
    unit: str = "um/m"

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        ids = tuple(str(i) for i in self.sensor_ids)
        if v.shape[0] != len(ids):
            raise ShapeMismatchError(
                f"{v.shape[0]} rows but {len(ids)} sensor ids")
        kinds = self.kinds or (SensorKind.X_STRAIN,) * len(ids)
        kinds = tuple(SensorKind(k) for k in kinds)
        pos = self.positions
        pos = np.zeros((len(ids), 2)) if pos is None else np.asarray(pos, float)
        t = self.t
        t = np.arange(v.shape[1], dtype=float) if t is None else np.asarray(t, float)
        if t.shape != (v.shape[1],):
            raise ShapeMismatchError("t length does not match value columns")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "sensor_ids", ids)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "t", _frozen(t))

    @property
    def n_sensors(self):
        return self.values.shape[0]

    @property
    def n_steps(self):
        return self.values.shape[1]

    def index_of(self, sensor_id):
        try:
            return self.sensor_ids.index(str(sensor_id))
        except ValueError:
            raise KeyError(f"unknown sensor id {sensor_id!r}") from None

    def with_values(self, values):
        return SignalMatrix(values=values, sensor_ids=self.sensor_ids,
                            kinds=self.kinds, positions=self.positions,
                            t=self.t, unit=self.unit)

    def select(self, indices):
        """Restrict to a subset of sensors (row order follows ``indices``)."""
        idx = np.asarray(indices, dtype=int)
        return SignalMatrix(
            values=self.values[idx],
            sensor_ids=tuple(self.sensor_ids[i] for i in idx),
            kinds=tuple(self.kinds[i] for i in idx),
            positions=self.positions[idx],
            t=self.t, unit=self.unit)

    def select_kinds(self, kinds):
        wanted = {SensorKind(k) for k in kinds}
        idx = [i for i, k in enumerate(self.kinds) if k in wanted]
        return self.select(idx)


@dataclass(frozen=True)
class EventWindow:
    """Half-open timestep range [start, end) around one traffic event."""

    start: int
    end: int
    peak_magnitude: float = 0.0

    def __post_init__(self):
        if not self.start < self.end:
            raise ConfigInvalidError(f"empty window [{self.start}, {self.end})")


def window_steps(windows, n_steps=None):
    """Sorted union of timestep indices covered by the windows.

    Accepts :class:`EventWindow` objects or plain (start, end) pairs; the
    half-open convention applies to both. Clips to [0, n_steps) when given.
    """
    steps = set()
    for w in windows:
        start, end = (w.start, w.end) if hasattr(w, "start") else (w[0], w[1])
        steps.update(range(int(start), int(end)))
    idx = np.array(sorted(steps), dtype=int)
    if n_steps is not None:
        idx = idx[(idx >= 0) & (idx < n_steps)]
    return idx


def as_signal_values(signals) -> np.ndarray:
    """Coerce a SignalMatrix or array-like to a (n_sensors, n_steps) array."""
    if isinstance(signals, SignalMatrix):
        return signals.values
    return np.atleast_2d(np.asarray(signals, dtype=float))

"""Ingestion, preprocessing, event detection, and synthetic bridge data.

The preprocessing chain mirrors the usual strain-monitoring pipeline:
bin-average the raw rate down to working resolution, z-score per sensor,
and realign sensor clocks by peak cross-correlation. The synthetic
generator stands in for proprietary bridge recordings: girder sensors see
positive strain pulses from moving vehicle loads, deck sensors respond
with the opposite sign at smaller magnitude.

File formats: signals CSV (first column ``t`` in seconds, one column per
sensor id), sensor metadata JSON ([{id, kind, x, y}]), events JSON
([{start, end, peak}]).
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from .errors import (BinTooSmallError, ConfigInvalidError, NoEventsError,
                     ReferenceMissingError, ZeroVarianceError)
from .graph import SensorGraph, SensorKind
from .signals import EventWindow, RawRecording, SignalMatrix
from .similarity import SimilarityKind, build_graph


def downsample_mean(rec: RawRecording, bin_seconds=0.1) -> SignalMatrix:
    """Non-overlapping bin means; a trailing partial bin is dropped.

    The bin must span an integer number (>= 1) of source samples. Output
    times are the bin start times.
    """
    exact = bin_seconds * rec.sample_rate_hz
    spb = int(round(exact))
    if spb < 1 or abs(exact - spb) > 1e-9:
        raise BinTooSmallError(
            f"bin of {bin_seconds}s spans {exact:g} samples at "
            f"{rec.sample_rate_hz:g} Hz; need an integer >= 1")
    n_bins = rec.n_samples // spb
    v = rec.values[:, :n_bins * spb].reshape(rec.n_sensors, n_bins, spb)
    return SignalMatrix(values=v.mean(axis=2), sensor_ids=rec.sensor_ids,
                        kinds=rec.kinds, positions=rec.positions,
                        t=np.arange(n_bins) * bin_seconds, unit=rec.unit)


def zscore(signals: SignalMatrix) -> SignalMatrix:
    """Per-sensor standardization to mean 0, population sd 1."""
    v = signals.values
    mean = v.mean(axis=1, keepdims=True)
    sd = v.std(axis=1, keepdims=True)  # population convention
    flat = np.nonzero(sd.ravel() == 0.0)[0]
    if len(flat):
        raise ZeroVarianceError(
            f"constant sensors cannot be z-scored: "
            f"{[signals.sensor_ids[i] for i in flat]}")
    out = signals.with_values((v - mean) / sd)
    return SignalMatrix(values=out.values, sensor_ids=out.sensor_ids,
                        kinds=out.kinds, positions=out.positions,
                        t=out.t, unit="z")


@dataclass(frozen=True)
class LagReport:
    sensor_id: str
    lag: int
    confidence: float
    low_confidence: bool


def align_by_peaks(signals: SignalMatrix, reference_id, max_lag,
                   confidence_threshold=0.2):
    """Shift each sensor to the reference clock via peak cross-correlation.

    The reported lag is the shift (in steps) maximizing the centered
    cross-correlation of |signal| against |reference|: a positive lag means
    the sensor's peaks arrive later than the reference's, and realignment
    advances the series by that many steps (zero-padding the freed edge).
    Sensors whose best correlation falls below ``confidence_threshold``
    keep their chosen lag but are flagged low-confidence.
    """
    t_steps = signals.n_steps
    if not max_lag < t_steps / 4:
        raise ConfigInvalidError(f"max_lag {max_lag} must be < T/4 = {t_steps / 4}")
    try:
        ref_idx = signals.index_of(reference_id)
    except KeyError:
        raise ReferenceMissingError(
            f"reference sensor {reference_id!r} not found") from None

    ref = np.abs(signals.values[ref_idx])
    aligned = np.empty_like(signals.values)
    reports = []
    for i, sid in enumerate(signals.sensor_ids):
        sig = np.abs(signals.values[i])
        best_lag, best_score = 0, -np.inf
        for lag in range(-int(max_lag), int(max_lag) + 1):
            lo, hi = max(0, -lag), min(t_steps, t_steps - lag)
            a, b = ref[lo:hi], sig[lo + lag:hi + lag]
            ac, bc = a - a.mean(), b - b.mean()
            norm = float(np.linalg.norm(ac) * np.linalg.norm(bc))
            score = float(np.dot(ac, bc)) / norm if norm > 0 else 0.0
            # strict > keeps the smallest admissible lag on exact ties
            if score > best_score:
                best_lag, best_score = lag, score
        best_conf = max(best_score, 0.0)
        shifted = np.zeros(t_steps)
        lo, hi = max(0, -best_lag), min(t_steps, t_steps - best_lag)
        shifted[lo:hi] = signals.values[i, lo + best_lag:hi + best_lag]
        aligned[i] = shifted
        reports.append(LagReport(sensor_id=sid, lag=best_lag,
                                 confidence=best_conf,
                                 low_confidence=best_conf < confidence_threshold))
    return signals.with_values(aligned), reports


def detect_events(signals: SignalMatrix, top_n=10, threshold=2.0,
                  merge_gap=10, pad=10):
    """Find the strongest traffic events in a signal matrix.

    Activity is the cross-sensor mean of |per-sensor z-score|; steps above
    ``threshold`` are marked, marks closer than ``merge_gap`` merge into one
    window, windows get ``pad`` steps of margin per side (overlaps created
    by padding are merged so windows stay disjoint), and the ``top_n``
    windows by peak activity are returned in time order.
    """
    t_steps = signals.n_steps
    if t_steps < 50:
        raise ConfigInvalidError(f"need at least 50 steps, got {t_steps}")
    v = signals.values
    sd = v.std(axis=1, keepdims=True)
    safe = np.where(sd > 0, sd, 1.0)
    z = np.abs((v - v.mean(axis=1, keepdims=True)) / safe)
    z[(sd == 0).ravel()] = 0.0  # constant sensors carry no activity
    activity = z.mean(axis=0)

    marks = np.nonzero(activity > threshold)[0]
    if len(marks) == 0:
        raise NoEventsError(f"no step exceeds activity threshold {threshold}")

    clusters = [[int(marks[0]), int(marks[0])]]
    for m in marks[1:]:
        if m - clusters[-1][1] < merge_gap:
            clusters[-1][1] = int(m)
        else:
            clusters.append([int(m), int(m)])

    padded = []
    for lo, hi in clusters:
        lo, hi = max(0, lo - pad), min(t_steps, hi + 1 + pad)
        if padded and lo <= padded[-1][1]:
            padded[-1][1] = max(padded[-1][1], hi)
        else:
            padded.append([lo, hi])

    windows = [EventWindow(start=lo, end=hi,
                           peak_magnitude=float(activity[lo:hi].max()))
               for lo, hi in padded]
    windows.sort(key=lambda w: -w.peak_magnitude)
    return sorted(windows[:top_n], key=lambda w: w.start)


# --- synthetic bridge recordings -------------------------------------------

@dataclass(frozen=True)
class Vehicle:
    """One load crossing the span: enters at t0 and drives at constant speed
    along a lane at lateral offset lane_y."""

    t0: float
    speed: float
    lane_y: float
    weight: float


@dataclass(frozen=True)
class SynthConfig:
    n_girder: int = 8
    n_deck: int = 8
    girder_rows: int = 2
    deck_rows: int = 2
    span_m: float = 40.0
    width_m: float = 8.0
    duration_s: float = 180.0
    sample_rate_hz: float = 100.0
    vehicles: object = 6              # count to generate, or explicit list
    noise_sd: float = 0.02
    pulse_halfwidth_m: float = 16.0   # along-span spread of the load response
    lane_coupling_m: float = 4.0      # lateral decay of the load response
    deck_ratio: float = 0.4           # deck magnitude relative to girders
    deck_width_factor: float = 1.6    # deck plates spread the load footprint
    mode_scale: float = 0.5           # vibration-mode amplitude vs mean weight
    mode_tau_s: float = 1.5           # smoothness of the mode excitation
    speed_range: tuple = (8.0, 15.0)
    weight_range: tuple = (1.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_girder + self.n_deck < 2:
            raise ConfigInvalidError("need at least 2 sensors")
        if self.n_girder < 0 or self.n_deck < 0:
            raise ConfigInvalidError("sensor counts must be >= 0")
        if self.girder_rows < 1 or self.deck_rows < 1:
            raise ConfigInvalidError("row counts must be >= 1")
        if self.duration_s <= 0 or self.sample_rate_hz <= 0:
            raise ConfigInvalidError("duration and sample rate must be > 0")
        if self.span_m <= 0 or self.width_m <= 0:
            raise ConfigInvalidError("span and width must be > 0")


def _sensor_layout(cfg: SynthConfig):
    """Evenly spaced sensors: girder rows on the lateral edges, deck rows in
    the interior. Returns (ids, kinds, positions)."""
    ids, kinds, pos = [], [], []

    def rows(count, n_rows, edge):
        offsets = (np.array([0.0, 1.0][:n_rows]) * cfg.width_m if edge else
                   (np.arange(1, n_rows + 1) / (n_rows + 1)) * cfg.width_m)
        if edge and n_rows > 2:
            offsets = np.linspace(0.0, cfg.width_m, n_rows)
        per = [count // n_rows + (1 if r < count % n_rows else 0)
               for r in range(n_rows)]
        out = []
        for r, cnt in enumerate(per):
            xs = (np.arange(cnt) + 0.5) / cnt * cfg.span_m if cnt else []
            out.extend((x, offsets[r]) for x in xs)
        return out

    for k, (x, y) in enumerate(rows(cfg.n_girder, cfg.girder_rows, edge=True)):
        ids.append(f"g{k:02d}")
        kinds.append(SensorKind.X_STRAIN)
        pos.append((x, y))
    for k, (x, y) in enumerate(rows(cfg.n_deck, cfg.deck_rows, edge=False)):
        ids.append(f"d{k:02d}")
        kinds.append(SensorKind.Y_STRAIN)
        pos.append((x, y))
    return tuple(ids), tuple(kinds), np.array(pos, dtype=float)


def _make_vehicles(cfg: SynthConfig, rng):
    if not isinstance(cfg.vehicles, int):
        vehicles = list(cfg.vehicles)
        for v in vehicles:
            if v.t0 < 0 or v.t0 + cfg.span_m / v.speed > cfg.duration_s:
                raise ConfigInvalidError(
                    f"vehicle at t0={v.t0} does not finish crossing within "
                    f"duration {cfg.duration_s}s")
        return vehicles
    count = cfg.vehicles
    if count == 0:
        return []
    slot = cfg.duration_s / count
    lo_speed, hi_speed = cfg.speed_range
    longest = cfg.span_m / lo_speed
    if longest >= cfg.duration_s:
        raise ConfigInvalidError(
            f"duration {cfg.duration_s}s shorter than the slowest crossing "
            f"({longest:.1f}s)")
    vehicles = []
    for k in range(count):
        speed = rng.uniform(lo_speed, hi_speed)
        crossing = cfg.span_m / speed
        latest = min(slot - crossing, slot * 0.5)
        jitter = rng.uniform(0.0, max(latest, 1e-9))
        t0 = min(k * slot + jitter, cfg.duration_s - crossing)
        vehicles.append(Vehicle(
            t0=max(0.0, t0), speed=speed,
            lane_y=rng.uniform(0.1 * cfg.width_m, 0.9 * cfg.width_m),
            weight=rng.uniform(*cfg.weight_range)))
    return vehicles


def synth_bridge(cfg: SynthConfig):
    """Simulate a bridge recording; returns (RawRecording, ground-truth graph).

    Each vehicle produces a Gaussian strain pulse sweeping along the span;
    girder sensors respond positively, scaled by lateral proximity to the
    vehicle lane, deck sensors with opposite sign at ``deck_ratio``
    magnitude and a wider footprint (the plate spreads the load). On top of
    the direct load response, traffic excites two smooth vibration modes
    gated by the load envelope: a bending mode (positive on girders,
    countered on the deck) and a deck-local mode — so same-kind sensors
    cohere more strongly than opposite-kind pairs, as on the real bridge.
    Seeded noise is added last; the ground-truth graph links sensors by the
    similarity of their clean response profiles.
    """
    rng = np.random.default_rng(cfg.seed)
    ids, kinds, pos = _sensor_layout(cfg)
    vehicles = _make_vehicles(cfg, rng)
    t = np.arange(int(round(cfg.duration_s * cfg.sample_rate_hz))) / cfg.sample_rate_hz

    girder = np.array([k is SensorKind.X_STRAIN for k in kinds])
    sign = np.where(girder, 1.0, -cfg.deck_ratio)
    halfwidth = np.where(girder, cfg.pulse_halfwidth_m,
                         cfg.pulse_halfwidth_m * cfg.deck_width_factor)
    clean = np.zeros((len(ids), len(t)))
    envelope = np.zeros(len(t))
    for v in vehicles:
        x_v = v.speed * (t - v.t0)  # (T,)
        along = np.exp(-((pos[:, 0, None] - x_v[None, :]) ** 2)
                       / (2.0 * halfwidth[:, None] ** 2))
        lateral = np.exp(-((pos[:, 1] - v.lane_y) ** 2)
                         / (2.0 * cfg.lane_coupling_m ** 2))
        clean += v.weight * sign[:, None] * lateral[:, None] * along
        # load-on-span proxy that drives the vibration modes
        envelope += v.weight * np.exp(
            -((cfg.span_m / 2.0 - x_v) ** 2)
            / (2.0 * (cfg.pulse_halfwidth_m + cfg.span_m / 2.0) ** 2))

    if cfg.mode_scale > 0 and vehicles:
        dt = 1.0 / cfg.sample_rate_hz
        alpha = dt / (cfg.mode_tau_s + dt)

        def smooth_mode():
            m = lfilter([alpha], [1.0, -(1.0 - alpha)], rng.normal(size=len(t)))
            return m / m.std()

        env = envelope / max(envelope.max(), 1e-12)
        bending = smooth_mode() * env
        deck_local = smooth_mode() * env
        amp = cfg.mode_scale * float(np.mean([v.weight for v in vehicles]))
        clean[girder] += amp * bending[None, :]
        clean[~girder] += (-cfg.deck_ratio * amp * bending
                           + cfg.deck_ratio * amp * deck_local)[None, :]

    values = clean + rng.normal(0.0, cfg.noise_sd, size=clean.shape) \
        if cfg.noise_sd > 0 else clean.copy()
    rec = RawRecording(values=values, sample_rate_hz=cfg.sample_rate_hz,
                       sensor_ids=ids, kinds=kinds, positions=pos)

    if np.all(clean.std(axis=1) > 0):
        profile = SignalMatrix(values=clean, sensor_ids=ids, kinds=kinds,
                               positions=pos, t=t)
        truth = build_graph(profile, SimilarityKind.CORRELATION, k=3)
    else:
        truth = SensorGraph(node_ids=ids, weights=np.zeros((len(ids),) * 2),
                            positions=pos, kinds=kinds)
    return rec, truth


def simulate_processed(cfg: SynthConfig, bin_seconds=0.1):
    """synth_bridge -> bin-average -> z-score, the standard working form."""
    rec, truth = synth_bridge(cfg)
    return zscore(downsample_mean(rec, bin_seconds)), truth


# --- file round-trips -------------------------------------------------------

def save_signals_csv(signals: SignalMatrix, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *signals.sensor_ids])
        for k in range(signals.n_steps):
            writer.writerow([repr(float(signals.t[k])),
                             *(repr(float(x)) for x in signals.values[:, k])])


def load_signals_csv(path, meta_path=None, exclude=()):
    frame = pd.read_csv(path, float_precision="round_trip")
    if frame.columns[0] != "t":
        raise ConfigInvalidError(f"{path}: first column must be 't'")
    drop = {str(e) for e in exclude}
    ids = [c for c in frame.columns[1:] if c not in drop]
    missing = drop - set(frame.columns[1:])
    if missing:
        raise ConfigInvalidError(f"cannot exclude unknown sensors {sorted(missing)}")
    kinds = positions = None
    if meta_path is not None:
        meta = load_sensor_meta(meta_path)
        by_id = {m["id"]: m for m in meta}
        absent = [i for i in ids if i not in by_id]
        if absent:
            raise ConfigInvalidError(f"sensors missing from metadata: {absent}")
        kinds = tuple(by_id[i]["kind"] for i in ids)
        positions = np.array([[by_id[i]["x"], by_id[i]["y"]] for i in ids])
    return SignalMatrix(values=frame[ids].to_numpy().T, sensor_ids=tuple(ids),
                        kinds=kinds, positions=positions,
                        t=frame["t"].to_numpy())


def save_sensor_meta(signals, path):
    meta = [{"id": sid, "kind": kind.value, "x": float(x), "y": float(y)}
            for sid, kind, (x, y) in zip(signals.sensor_ids, signals.kinds,
                                         signals.positions)]
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_sensor_meta(path):
    with open(path) as fh:
        meta = json.load(fh)
    for m in meta:
        SensorKind(m.get("kind", "x_strain"))
    return meta


def save_events_json(windows, path):
    out = [{"start": int(w.start), "end": int(w.end),
            "peak": float(w.peak_magnitude)} for w in windows]
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_events_json(path):
    with open(path) as fh:
        raw = json.load(fh)
    return [EventWindow(start=int(w["start"]), end=int(w["end"]),
                        peak_magnitude=float(w.get("peak", 0.0))) for w in raw]

"""Command-line entry point: the full pipeline under one `gsp` command.

Every command resolves its parameters, runs, writes its outputs, and drops a
manifest next to the primary output recording the resolved argv, seeds,
input hashes, output paths, and timings. `gsp rerun --manifest M` replays a
recorded run (outputs rebased into a fresh directory), which reproduces the
output files byte for byte.

Exit codes: 0 success, 2 configuration/validation problem, 3 runtime
numeric failure.
"""

import functools
import hashlib
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .dataio import (SynthConfig, detect_events, load_events_json,
                     load_sensor_meta, load_signals_csv, save_events_json,
                     save_sensor_meta, save_signals_csv, simulate_processed)
from .errors import (ConfigInvalidError, DivergedLossError, GspError,
                     NoEventsError, NonFiniteGainError, RangeOutOfBoundsError,
                     SingularSystemError)
from .graph import SensorGraph
from .reconstruct import MaskFactorization, SampleMask
from .sampling import SearchConfig, run_search
from .signals import SignalMatrix
from .similarity import SimilarityKind, build_graph
from .spectral import (FilterSpec, basis_for, filter_signal_matrix,
                       identity_filter, lowpass, total_variation)
from .tgcn import (TgcnModel, TrainConfig, benchmark_last_value,
                   forecast_rmse, make_windows, train)

_NUMERIC_ERRORS = (SingularSystemError, DivergedLossError, NonFiniteGainError)


def _current_argv():
    """Rebuild the running command's argv from its resolved parameters.

    Recording resolved values (rather than the raw command line) makes a
    manifest self-contained: replaying it does not depend on any --config
    file that contributed defaults.
    """
    ctx = click.get_current_context()
    argv = [ctx.info_name]
    for param in ctx.command.params:
        if not isinstance(param, click.Option):
            continue
        value = ctx.params.get(param.name)
        if value is None:
            continue
        flag = param.opts[0]
        if param.is_flag:
            if value:
                argv.append(flag)
            elif param.secondary_opts:
                argv.append(param.secondary_opts[0])
        else:
            argv.extend([flag, str(value)])
    return argv


def _fail(code, message):
    click.echo(f"gsp: error: {message}", err=True)
    sys.exit(code)


def command_guard(fn):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _NUMERIC_ERRORS as exc:
            _fail(3, exc)
        except (GspError, OSError, KeyError, ValueError) as exc:
            _fail(2, exc)

    return wrapper


# --- manifests ---------------------------------------------------------------

def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def write_manifest(command, argv, inputs, outputs, seed=None, config=None,
                   timings=None, manifest_path=None):
    primary = Path(outputs[0])
    if manifest_path is None:
        if primary.is_dir():
            manifest_path = primary / "manifest.json"
        else:
            manifest_path = primary.with_name(primary.stem + ".manifest.json")
    doc = {
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "config": config or {},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "timings": timings or {},
    }
    with open(manifest_path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest_path


def _write_json(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# --- shared loading helpers --------------------------------------------------

def _load_signals(path, meta=None, exclude=""):
    names = tuple(s.strip() for s in exclude.split(",") if s.strip())
    return load_signals_csv(path, meta_path=meta, exclude=names)


def _load_aligned(signals_path, graph, meta=None, exclude=""):
    """Load signals and reorder rows to the graph's node order."""
    sm = _load_signals(signals_path, meta, exclude)
    if set(sm.sensor_ids) != set(graph.node_ids):
        missing = set(graph.node_ids) - set(sm.sensor_ids)
        extra = set(sm.sensor_ids) - set(graph.node_ids)
        raise ConfigInvalidError(
            f"signals do not match graph nodes (missing {sorted(missing)}, "
            f"extra {sorted(extra)})")
    order = [sm.index_of(nid) for nid in graph.node_ids]
    return sm.select(order)


def parse_filter_spec(text) -> FilterSpec:
    if text == "identity":
        return identity_filter()
    name, _, arg = text.partition(":")
    if name == "lowpass":
        try:
            alpha = float(arg) if arg else 0.5
        except ValueError:
            raise ConfigInvalidError(f"bad filter parameter {arg!r}") from None
        return lowpass(alpha)
    raise ConfigInvalidError(
        f"unknown filter {text!r} (expected lowpass:ALPHA or identity)")


def _save_matrix_csv(values, template: SignalMatrix, path):
    save_signals_csv(template.with_values(values), path)


# --- config file -> default map ----------------------------------------------

def _parse_config_value(raw):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def load_config_file(path, commands):
    """`command.param = value` lines; '#' starts a comment."""
    defaults = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalidError(f"{path}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        cmd, _, param = key.partition(".")
        if not param or cmd not in commands:
            raise ConfigInvalidError(
                f"{path}:{lineno}: unknown config key {key!r} "
                f"(use <command>.<param>)")
        param_names = {p.name for p in commands[cmd].params}
        if param.replace("-", "_") not in param_names:
            raise ConfigInvalidError(
                f"{path}:{lineno}: unknown config key {key!r} "
                f"(command {cmd!r} has no option {param!r})")
        defaults.setdefault(cmd, {})[param.replace("-", "_")] = \
            _parse_config_value(raw)
    return defaults


@click.group()
@click.version_option(version=__version__, prog_name="gsp")
@click.option("--config", "config_path", type=click.Path(exists=False),
              default=None, help="Key-value defaults file "
              "(<command>.<param> = value per line).")
@click.pass_context
def main(ctx, config_path):
    """Graph signal processing toolkit for bridge sensor networks."""
    if config_path is not None:
        if not Path(config_path).exists():
            _fail(2, f"config file {config_path!r} does not exist")
        try:
            ctx.default_map = load_config_file(config_path, main.commands)
        except ConfigInvalidError as exc:
            _fail(2, exc)


# --- simulate ----------------------------------------------------------------

@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--girder", default=8, show_default=True, type=int,
              help="Number of girder sensors.")
@click.option("--deck", default=8, show_default=True, type=int,
              help="Number of deck sensors.")
@click.option("--duration", default=180.0, show_default=True, type=float,
              help="Recording length in seconds.")
@click.option("--vehicles", default=6, show_default=True, type=int)
@click.option("--noise", default=0.02, show_default=True, type=float)
@click.option("--raw/--no-raw", default=False, show_default=True,
              help="Also write the 100 Hz raw recording.")
@command_guard
def simulate(out_dir, seed, girder, deck, duration, vehicles, noise, raw):
    """Generate a synthetic bridge dataset (signals, sensors, graph, events)."""
    t0 = time.perf_counter()
    cfg = SynthConfig(n_girder=girder, n_deck=deck, duration_s=duration,
                      vehicles=vehicles, noise_sd=noise, seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if raw:
        from .dataio import downsample_mean, synth_bridge, zscore
        rec, truth = synth_bridge(cfg)
        raw_sm = SignalMatrix(values=rec.values, sensor_ids=rec.sensor_ids,
                              kinds=rec.kinds, positions=rec.positions,
                              t=np.arange(rec.n_samples) / rec.sample_rate_hz,
                              unit=rec.unit)
        save_signals_csv(raw_sm, out / "raw_signals.csv")
        signals = zscore(downsample_mean(rec))
    else:
        signals, truth = simulate_processed(cfg)
    save_signals_csv(signals, out / "signals.csv")
    save_sensor_meta(signals, out / "sensors.json")
    truth.save(out / "graph.json")
    try:
        events = detect_events(signals)
    except (NoEventsError, ConfigInvalidError):
        events = []
    save_events_json(events, out / "events.json")
    outputs = [out, out / "signals.csv", out / "sensors.json",
               out / "graph.json", out / "events.json"]
    if raw:
        outputs.append(out / "raw_signals.csv")
    write_manifest("simulate", _current_argv(), [], outputs, seed=seed,
                   config={"girder": girder, "deck": deck,
                           "duration": duration, "vehicles": vehicles,
                           "noise": noise, "raw": raw},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"simulated {signals.n_sensors} sensors x "
               f"{signals.n_steps} steps, {len(events)} events -> {out}")


# --- buildgraph ---------------------------------------------------------------

_METRICS = {"corr": SimilarityKind.CORRELATION, "dtw": SimilarityKind.DTW_DISTANCE}


@main.command()
@click.option("--metric", type=click.Choice(["corr", "dtw"]), default="corr",
              show_default=True)
@click.option("--topk", default=3, show_default=True, type=int)
@click.option("--in", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--meta", default=None, type=click.Path(exists=True),
              help="Sensor metadata JSON sidecar.")
@click.option("--exclude", default="", help="Comma-separated sensor ids to drop.")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def buildgraph(metric, topk, signals_path, meta, exclude, out_path):
    """Build the top-k similarity graph from a signals CSV."""
    t0 = time.perf_counter()
    signals = _load_signals(signals_path, meta, exclude)
    graph = build_graph(signals, _METRICS[metric], topk)
    graph.save(out_path)
    write_manifest("buildgraph", _current_argv(),
                   [p for p in (signals_path, meta) if p], [out_path],
                   config={"metric": metric, "topk": topk, "exclude": exclude},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"graph with {graph.n} nodes, {len(graph.edges())} edges "
               f"-> {out_path}")


# --- filter -------------------------------------------------------------------

@main.command("filter")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--filter", "filter_text", default="lowpass:0.5",
              show_default=True, help="lowpass:ALPHA or identity.")
@click.option("--exclude", default="")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def filter_cmd(graph_path, signals_path, filter_text, exclude, out_path):
    """Low-pass filter every timestep over the graph spectrum."""
    t0 = time.perf_counter()
    graph = SensorGraph.load(graph_path)
    signals = _load_aligned(signals_path, graph, exclude=exclude)
    spec = parse_filter_spec(filter_text)
    filtered = filter_signal_matrix(graph, signals, spec)
    _save_matrix_csv(filtered, signals, out_path)
    write_manifest("filter", _current_argv(), [graph_path, signals_path],
                   [out_path], config={"filter": spec.name, "exclude": exclude},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"filtered {signals.n_sensors} sensors with {spec.name} "
               f"-> {out_path}")


# --- tv ------------------------------------------------------------------------

@main.command()
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--per-node", is_flag=True, default=False)
@click.option("--shift", type=click.Choice(["row_normalized", "adjacency"]),
              default="row_normalized", show_default=True)
@click.option("--exclude", default="")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def tv(graph_path, signals_path, per_node, shift, exclude, out_path):
    """Total variation of each timestep (global, or per node with --per-node)."""
    t0 = time.perf_counter()
    graph = SensorGraph.load(graph_path)
    signals = _load_aligned(signals_path, graph, exclude=exclude)
    values = total_variation(graph, signals.values, per_node=per_node,
                             shift=shift)
    if per_node:
        _save_matrix_csv(values, signals, out_path)
    else:
        import csv as _csv
        with open(out_path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["t", "tv"])
            for k in range(signals.n_steps):
                writer.writerow([repr(float(signals.t[k])),
                                 repr(float(values[k]))])
    write_manifest("tv", _current_argv(), [graph_path, signals_path], [out_path],
                   config={"per_node": per_node, "shift": shift},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"total variation -> {out_path}")


# --- reconstruct ----------------------------------------------------------------

@main.command()
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--mask", "mask_path", required=True,
              type=click.Path(exists=True))
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--tau", default=0.0, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def reconstruct(graph_path, mask_path, signals_path, tau, out_path):
    """Reconstruct all sensors from the masked subset, timestep by timestep."""
    t0 = time.perf_counter()
    graph = SensorGraph.load(graph_path)
    with open(mask_path) as fh:
        mask = SampleMask.from_json_dict(json.load(fh), list(graph.node_ids))
    signals = _load_aligned(signals_path, graph)
    factor = MaskFactorization(graph, mask, tau)
    recon = factor.solve(signals.values[mask.selected])
    _save_matrix_csv(recon, signals, out_path)
    write_manifest("reconstruct", _current_argv(),
                   [graph_path, mask_path, signals_path], [out_path],
                   config={"tau": tau},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"reconstructed {graph.n} sensors from {mask.count} sampled "
               f"-> {out_path}")


# --- sample ---------------------------------------------------------------------

_ALGOS = {"random": "random", "bottomup": "bottom_up", "topdown": "top_down"}


@main.command()
@click.option("--algo", type=click.Choice(sorted(_ALGOS)), required=True)
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--events", "events_path", required=True,
              type=click.Path(exists=True))
@click.option("--budget", default=0.25, show_default=True, type=float,
              help="Fraction of sensors to select.")
@click.option("--iters", default=500, show_default=True, type=int)
@click.option("--top-pool", default=3, show_default=True, type=int)
@click.option("--tau", default=0.0, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--filtered", is_flag=True, default=False)
@click.option("--exclude", default="")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def sample(algo, graph_path, signals_path, events_path, budget, iters,
           top_pool, tau, seed, filtered, exclude, out_path):
    """Search for the most informative sensor subset."""
    t0 = time.perf_counter()
    graph = SensorGraph.load(graph_path)
    signals = _load_aligned(signals_path, graph, exclude=exclude)
    events = load_events_json(events_path)
    cfg = SearchConfig(budget_fraction=budget, iterations=iters,
                       top_pool=top_pool, rng_seed=seed, filtered=filtered,
                       tau=tau)
    result = run_search(_ALGOS[algo], graph, signals, events, cfg)
    doc = result.to_json_dict(list(graph.node_ids))
    doc["config"] = {"budget": budget, "iters": iters, "top_pool": top_pool,
                     "tau": tau, "seed": seed, "filtered": filtered}
    _write_json(doc, out_path)
    write_manifest("sample", _current_argv(),
                   [graph_path, signals_path, events_path], [out_path],
                   seed=seed, config=doc["config"],
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"{algo}: rmse {result.rmse:.6f} with "
               f"{result.mask.count}/{graph.n} sensors -> {out_path}")


# --- forecast --------------------------------------------------------------------

@main.command()
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--filtered", is_flag=True, default=False,
              help="Low-pass filter the signals before windowing.")
@click.option("--mask", "mask_path", default=None, type=click.Path(exists=True),
              help="Train on the masked sensor subset only.")
@click.option("--epochs", default=25, show_default=True, type=int)
@click.option("--batch", default=32, show_default=True, type=int)
@click.option("--lr", default=1e-3, show_default=True, type=float)
@click.option("--patience", default=8, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--save-model", "model_path", default=None, type=click.Path())
@click.option("--exclude", default="")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def forecast(graph_path, signals_path, filtered, mask_path, epochs, batch, lr,
             patience, seed, model_path, exclude, out_path):
    """Train the graph forecaster and score it against the last-value baseline."""
    t0 = time.perf_counter()
    graph = SensorGraph.load(graph_path)
    signals = _load_aligned(signals_path, graph, exclude=exclude)
    if mask_path is not None:
        with open(mask_path) as fh:
            mask = SampleMask.from_json_dict(json.load(fh),
                                             list(graph.node_ids))
        idx = mask.indices
        graph = graph.subgraph(idx)
        signals = signals.select(idx)
    values = signals.values
    if filtered:
        values = filter_signal_matrix(graph, values, lowpass(0.5))
    ws = make_windows(values, in_steps=10, horizon=12)
    model = TgcnModel(graph, seed=seed)
    history = train(model, ws, TrainConfig(epochs=epochs, batch_size=batch,
                                           learning_rate=lr, patience=patience,
                                           seed=seed))
    pred = model.predict(ws.inputs[ws.test_idx])
    bench = benchmark_last_value(ws)[ws.test_idx]
    targets = ws.targets[ws.test_idx]
    tgcn_rmse = forecast_rmse(pred, targets)
    bench_rmse = forecast_rmse(bench, targets)
    metrics = {
        "tgcn_rmse": tgcn_rmse,
        "benchmark_rmse": bench_rmse,
        "improvement_pct": (100.0 * (bench_rmse - tgcn_rmse) / bench_rmse
                            if bench_rmse > 0 else 0.0),
        "trainable_params": model.trainable_param_count(),
        "ms_per_epoch": history.ms_per_epoch,
    }
    _write_json(metrics, out_path)
    outputs = [out_path]
    if model_path is not None:
        model.save(model_path)
        outputs.append(model_path)
    write_manifest("forecast", _current_argv(),
                   [p for p in (graph_path, signals_path, mask_path) if p],
                   outputs, seed=seed,
                   config={"filtered": filtered, "epochs": epochs,
                           "batch": batch, "lr": lr, "patience": patience},
                   timings={"total_s": time.perf_counter() - t0,
                            "ms_per_epoch": history.ms_per_epoch})
    click.echo(f"tgcn {tgcn_rmse:.4f} vs benchmark {bench_rmse:.4f} "
               f"({metrics['improvement_pct']:+.1f}%) -> {out_path}")


# --- grid -----------------------------------------------------------------------

@main.command()
@click.option("--data", "data_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory from `gsp simulate` (signals/sensors/events).")
@click.option("--iters", default=25, show_default=True, type=int)
@click.option("--budget", default=0.25, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def grid(data_dir, iters, budget, seed, out_path):
    """Run the full sampling experiment grid and write a tidy results table.

    Cells: {random, bottomup, topdown} x {corr, dtw} x {unfiltered, filtered}
    x {x_strain, y_strain, combined}; each cell reports the mean and sd of
    per-event best RMSE.
    """
    t0 = time.perf_counter()
    data = Path(data_dir)
    signals = load_signals_csv(data / "signals.csv", data / "sensors.json")
    events = load_events_json(data / "events.json")
    if not events:
        raise ConfigInvalidError(f"{data / 'events.json'} lists no events")

    kinds = {"x_strain": ("x_strain",), "y_strain": ("y_strain",),
             "combined": ("x_strain", "y_strain")}
    rows = []
    cell = 0
    for metric in ("corr", "dtw"):
        for kind_name, kind_set in kinds.items():
            subset = signals.select_kinds(kind_set)
            if subset.n_sensors < 2:
                continue
            graph = build_graph(subset, _METRICS[metric], 3)
            for algo in ("random", "topdown", "bottomup"):
                for filtered in (False, True):
                    cell += 1
                    t_cell = time.perf_counter()
                    per_event, err = [], ""
                    try:
                        for e_idx, event in enumerate(events):
                            cfg = SearchConfig(
                                budget_fraction=budget, iterations=iters,
                                rng_seed=seed + 1000 * cell + e_idx,
                                filtered=filtered)
                            res = run_search(_ALGOS[algo], graph, subset,
                                             [event], cfg)
                            per_event.append(res.rmse)
                    except GspError as exc:
                        err = str(exc)
                        click.echo(f"cell {cell} failed: {exc}", err=True)
                    rows.append({
                        "metric": metric, "kind": kind_name, "algo": algo,
                        "filtered": filtered,
                        "mean_rmse": float(np.mean(per_event)) if per_event
                        else float("nan"),
                        "sd_rmse": float(np.std(per_event)) if per_event
                        else float("nan"),
                        "n_events": len(per_event),
                        "seconds": time.perf_counter() - t_cell,
                        "error": err,
                    })

    import csv as _csv
    fields = ["metric", "kind", "algo", "filtered", "mean_rmse", "sd_rmse",
              "n_events", "seconds", "error"]
    with open(out_path, "w", newline="") as fh:
        writer = _csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            row = dict(row)
            row["mean_rmse"] = repr(row["mean_rmse"])
            row["sd_rmse"] = repr(row["sd_rmse"])
            row["seconds"] = f"{row['seconds']:.3f}"
            writer.writerow(row)
    write_manifest("grid", _current_argv(),
                   [data / "signals.csv", data / "sensors.json",
                    data / "events.json"], [out_path], seed=seed,
                   config={"iters": iters, "budget": budget},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"{len(rows)} grid cells -> {out_path}")


# --- snapshot --------------------------------------------------------------------

@main.command()
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=True))
@click.option("--t-start", required=True, type=int)
@click.option("--t-end", required=True, type=int,
              help="Exclusive end timestep.")
@click.option("--stride", default=1, show_default=True, type=int)
@click.option("--tv", "with_tv", is_flag=True, default=False,
              help="Attach per-node total variation to each frame.")
@click.option("--exclude", default="")
@click.option("--out", "out_path", required=True, type=click.Path())
@command_guard
def snapshot(graph_path, signals_path, t_start, t_end, stride, with_tv,
             exclude, out_path):
    """Export per-timestep node-value frames for external plotting."""
    t0 = time.perf_counter()
    graph = SensorGraph.load(graph_path)
    signals = _load_aligned(signals_path, graph, exclude=exclude)
    if not (0 <= t_start < t_end <= signals.n_steps):
        raise RangeOutOfBoundsError(
            f"[{t_start}, {t_end}) outside 0..{signals.n_steps}")
    if stride < 1:
        raise ConfigInvalidError("stride must be >= 1")
    positions = [[float(x), float(y)] for x, y in graph.positions]
    frames = []
    for t_idx in range(t_start, t_end, stride):
        frame = {
            "t": int(t_idx),
            "values": [float(v) for v in signals.values[:, t_idx]],
            "positions": positions,
        }
        if with_tv:
            per = total_variation(graph, signals.values[:, t_idx],
                                  per_node=True)
            frame["tv"] = [float(v) for v in per]
        frames.append(frame)
    _write_json({"node_ids": list(graph.node_ids), "frames": frames}, out_path)
    write_manifest("snapshot", _current_argv(), [graph_path, signals_path],
                   [out_path],
                   config={"t_start": t_start, "t_end": t_end,
                           "stride": stride, "tv": with_tv},
                   timings={"total_s": time.perf_counter() - t0})
    click.echo(f"{len(frames)} frames -> {out_path}")


# --- rerun -----------------------------------------------------------------------

@main.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path(),
              help="Directory the recorded outputs are rebased into.")
@command_guard
def rerun(manifest_path, out_dir):
    """Replay a recorded run; outputs are byte-identical to the original."""
    with open(manifest_path) as fh:
        doc = json.load(fh)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rebase = {}
    for recorded in doc["outputs"]:
        recorded_path = Path(recorded)
        rebase[str(recorded_path)] = str(
            out if recorded_path.is_dir() or not recorded_path.suffix
            else out / recorded_path.name)
    argv = [rebase.get(a, a) for a in doc["argv"]]
    click.echo(f"replaying: gsp {' '.join(argv)}")
    main.main(args=argv, standalone_mode=False)


if __name__ == "__main__":
    main()

"""The full forecasting model and its checkpoint format."""

import json
import struct
from collections import OrderedDict

import numpy as np

from ..errors import ShapeMismatchError
from ..graph import SensorGraph, normalized_adjacency
from .layers import Dense, Dropout, GraphConv, Lstm

_MAGIC = b"GSPT"


class TgcnModel:
    """Two graph-conv layers, two LSTM layers, dense Tanh head.

    Input is one window of shape (n_nodes, in_steps); the in_steps readings
    act as the first layer's node features. After the convolutions the
    gcn_filters channels are transposed into a length-gcn_filters sequence
    of node-vectors for the LSTMs. The spatial mixing matrix is fixed to
    the self-loop-normalized adjacency and is not trained.

    Targets are z-scored readings clipped to [-output_scale, output_scale]
    and divided by output_scale so the Tanh head can represent them;
    :meth:`predict` undoes the scaling.
    """

    def __init__(self, graph: SensorGraph, in_steps=10, gcn_filters=8,
                 lstm_units=50, dropout_rate=0.2, output_scale=3.0, seed=0):
        self.graph = graph
        self.n_nodes = graph.n
        self.in_steps = in_steps
        self.gcn_filters = gcn_filters
        self.lstm_units = lstm_units
        self.dropout_rate = dropout_rate
        self.output_scale = float(output_scale)
        self.seed = seed

        rng = np.random.default_rng(seed)
        mixing = normalized_adjacency(graph)
        self.gcn1 = GraphConv(mixing, in_steps, gcn_filters, rng=rng)
        self.gcn2 = GraphConv(mixing, gcn_filters, gcn_filters, rng=rng)
        self.lstm1 = Lstm(self.n_nodes, lstm_units, rng=rng,
                          return_sequence=True)
        self.lstm2 = Lstm(lstm_units, lstm_units, rng=rng,
                          return_sequence=False)
        self.dropout = Dropout(dropout_rate)
        self.dense = Dense(lstm_units, self.n_nodes, rng=rng)
        self._layers = OrderedDict([
            ("gcn1", self.gcn1), ("gcn2", self.gcn2),
            ("lstm1", self.lstm1), ("lstm2", self.lstm2),
            ("dense", self.dense),
        ])

    # --- parameter bookkeeping ---------------------------------------------

    def parameters(self) -> OrderedDict:
        """Live views of every trainable array, keyed 'layer.param'."""
        out = OrderedDict()
        for lname, layer in self._layers.items():
            for pname, arr in layer.params().items():
                out[f"{lname}.{pname}"] = arr
        return out

    def gradients(self) -> OrderedDict:
        out = OrderedDict()
        for lname, layer in self._layers.items():
            for pname, arr in layer.grads.items():
                out[f"{lname}.{pname}"] = arr
        return out

    def zero_grads(self):
        for layer in self._layers.values():
            for arr in layer.grads.values():
                arr[:] = 0.0

    def set_parameters(self, values: dict):
        params = self.parameters()
        for name, arr in values.items():
            if params[name].shape != arr.shape:
                raise ShapeMismatchError(f"{name}: {arr.shape} vs "
                                         f"{params[name].shape}")
            params[name][...] = arr

    def layer_param_counts(self) -> OrderedDict:
        """Per-layer counts, with the fixed mixing matrix counted inside the
        graph-conv layers (the convention used when auditing layer sizes)."""
        return OrderedDict([
            ("gcn1", self.gcn1.param_count(include_mixing=True)),
            ("gcn2", self.gcn2.param_count(include_mixing=True)),
            ("lstm1", self.lstm1.param_count()),
            ("lstm2", self.lstm2.param_count()),
            ("dense", self.dense.param_count()),
        ])

    def trainable_param_count(self) -> int:
        return int(sum(arr.size for arr in self.parameters().values()))

    # --- forward / backward -------------------------------------------------

    def forward(self, windows, dropout_rng=None):
        """(B, N, in_steps) or (N, in_steps) -> scaled predictions in (-1, 1)."""
        x = np.asarray(windows, dtype=float)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.shape[1:] != (self.n_nodes, self.in_steps):
            raise ShapeMismatchError(
                f"window shape {x.shape[1:]} != "
                f"({self.n_nodes}, {self.in_steps})")
        h = self.gcn1.forward(x)
        h = self.gcn2.forward(h)
        seq = np.swapaxes(h, 1, 2)  # channels become the LSTM sequence axis
        self._seq_shape = seq.shape
        h = self.lstm1.forward(seq)
        h = self.lstm2.forward(h)
        h = self.dropout.forward(h, rng=dropout_rng)
        out = self.dense.forward(h)
        return out[0] if single else out

    def backward(self, d_out):
        d = self.dense.backward(d_out)
        d = self.dropout.backward(d)
        d = self.lstm2.backward(d)
        d = self.lstm1.backward(d)
        d = np.swapaxes(d, 1, 2)
        d = self.gcn2.backward(d)
        self.gcn1.backward(d)

    def loss_and_grads(self, windows, targets_scaled, dropout_rng=None):
        """Mean-squared error and fresh gradients for one mini-batch.

        ``targets_scaled`` must already be in the Tanh range (see
        :meth:`scale_targets`).
        """
        x = np.asarray(windows, dtype=float)
        y = np.asarray(targets_scaled, dtype=float)
        pred = self.forward(x, dropout_rng=dropout_rng)
        if pred.shape != y.shape:
            raise ShapeMismatchError(f"{pred.shape} vs {y.shape}")
        diff = pred - y
        loss = float(np.mean(diff ** 2))
        self.zero_grads()
        self.backward(2.0 * diff / diff.size)
        return loss, self.gradients()

    # --- prediction in data units -------------------------------------------

    def scale_targets(self, targets):
        s = self.output_scale
        return np.clip(np.asarray(targets, dtype=float), -s, s) / s

    def predict(self, windows):
        """Forecasts in original (z-score) units."""
        return self.forward(windows) * self.output_scale

    # --- checkpoint: JSON header + raw tensor bytes in one file -------------

    def save(self, path):
        meta = {
            "format": "tgcn-checkpoint-v1",
            "n_nodes": self.n_nodes,
            "in_steps": self.in_steps,
            "gcn_filters": self.gcn_filters,
            "lstm_units": self.lstm_units,
            "dropout_rate": self.dropout_rate,
            "output_scale": self.output_scale,
            "seed": self.seed,
            "graph": self.graph.to_json_dict(),
            "tensors": [],
        }
        blobs = []
        offset = 0
        tensors = dict(self.parameters())
        tensors["mixing"] = self.gcn1.mixing
        for name, arr in tensors.items():
            raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
            meta["tensors"].append({"name": name, "shape": list(arr.shape),
                                    "dtype": "<f8", "offset": offset,
                                    "nbytes": len(raw)})
            blobs.append(raw)
            offset += len(raw)
        header = json.dumps(meta, sort_keys=True).encode()
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<Q", len(header)))
            fh.write(header)
            for raw in blobs:
                fh.write(raw)


def load_model(path) -> TgcnModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a model checkpoint")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        meta = json.loads(fh.read(hlen).decode())
        payload = fh.read()
    graph = SensorGraph.from_json_dict(meta["graph"])
    model = TgcnModel(graph, in_steps=meta["in_steps"],
                      gcn_filters=meta["gcn_filters"],
                      lstm_units=meta["lstm_units"],
                      dropout_rate=meta["dropout_rate"],
                      output_scale=meta["output_scale"], seed=meta["seed"])
    values = {}
    for spec in meta["tensors"]:
        raw = payload[spec["offset"]:spec["offset"] + spec["nbytes"]]
        values[spec["name"]] = np.frombuffer(raw, dtype=spec["dtype"]).reshape(
            spec["shape"]).astype(float)
    mixing = values.pop("mixing")
    model.gcn1.mixing = mixing
    model.gcn2.mixing = mixing
    model.set_parameters(values)
    return model

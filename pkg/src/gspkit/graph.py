"""Sensor graph representation and the matrix derivations built from it.

Graphs are dense: sensor networks in this domain stay well below a few
hundred nodes, and dense linear algebra keeps every downstream solve exact
and simple. All types are immutable after construction (arrays are marked
read-only) and safe to share across threads.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigInvalidError


class SensorKind(str, Enum):
    X_STRAIN = "x_strain"
    Y_STRAIN = "y_strain"
    VIBRATION = "vibration"
    TEMPERATURE = "temperature"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SensorGraph:
    """Weighted undirected sensor graph.

    ``weights`` is the symmetric non-negative adjacency matrix with zero
    diagonal; ``positions`` are 2-D sensor coordinates in meters.
    """

    node_ids: tuple
    weights: np.ndarray
    positions: np.ndarray = None
    kinds: tuple = None

    def __post_init__(self):
        ids = tuple(str(i) for i in self.node_ids)
        n = len(ids)
        if len(set(ids)) != n:
            raise ConfigInvalidError("duplicate node ids")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (n, n):
            raise ConfigInvalidError(
                f"weights shape {w.shape} does not match {n} node ids")
        if not np.allclose(w, w.T, atol=1e-12):
            raise ConfigInvalidError("weights must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise ConfigInvalidError("weights must have a zero diagonal")
        if np.any(w < 0.0):
            raise ConfigInvalidError("weights must be non-negative")
        # symmetrize exactly so A[i,j] == A[j,i] bit-for-bit
        w = (w + w.T) / 2.0
        np.fill_diagonal(w, 0.0)

        pos = self.positions
        pos = np.zeros((n, 2)) if pos is None else np.asarray(pos, dtype=float)
        if pos.shape != (n, 2):
            raise ConfigInvalidError(f"positions shape {pos.shape} != ({n}, 2)")

        kinds = self.kinds
        if kinds is None:
            kinds = (SensorKind.X_STRAIN,) * n
        kinds = tuple(SensorKind(k) for k in kinds)
        if len(kinds) != n:
            raise ConfigInvalidError("kinds length does not match node ids")

        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "kinds", kinds)

    @property
    def n(self):
        return len(self.node_ids)

    def index_of(self, node_id):
        try:
            return self.node_ids.index(str(node_id))
        except ValueError:
            raise KeyError(f"unknown node id {node_id!r}") from None

    def subgraph(self, indices):
        """Induced subgraph on the given node indices (order preserved)."""
        idx = np.asarray(indices, dtype=int)
        return SensorGraph(
            node_ids=tuple(self.node_ids[i] for i in idx),
            weights=self.weights[np.ix_(idx, idx)],
            positions=self.positions[idx],
            kinds=tuple(self.kinds[i] for i in idx),
        )

    def edges(self):
        """Undirected edge list [(i, j, w)] with i < j, sorted by (i, j)."""
        i, j = np.nonzero(np.triu(self.weights, k=1))
        return [(int(a), int(b), float(self.weights[a, b])) for a, b in zip(i, j)]

    # --- JSON wire format --------------------------------------------------
    # {nodes: [{id, x, y, kind}], edges: [{src, dst, w}]}, one entry per
    # undirected pair with src preceding dst in node order.

    def to_json_dict(self):
        nodes = [
            {"id": nid, "x": float(x), "y": float(y), "kind": kind.value}
            for nid, (x, y), kind in zip(self.node_ids, self.positions, self.kinds)
        ]
        edges = [
            {"src": self.node_ids[i], "dst": self.node_ids[j], "w": w}
            for i, j, w in self.edges()
        ]
        return {"nodes": nodes, "edges": edges}

    @classmethod
    def from_json_dict(cls, d):
        nodes = d["nodes"]
        ids = tuple(str(nd["id"]) for nd in nodes)
        pos = [(nd.get("x", 0.0), nd.get("y", 0.0)) for nd in nodes]
        kinds = tuple(nd.get("kind", "x_strain") for nd in nodes)
        index = {nid: k for k, nid in enumerate(ids)}
        w = np.zeros((len(ids), len(ids)))
        for e in d["edges"]:
            i, j = index[str(e["src"])], index[str(e["dst"])]
            w[i, j] = w[j, i] = float(e["w"])
        return cls(node_ids=ids, weights=w, positions=pos, kinds=kinds)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def degree_matrix(g: SensorGraph) -> np.ndarray:
    """Diagonal matrix of weighted row sums of the adjacency."""
    return np.diag(g.weights.sum(axis=1))


def laplacian(g: SensorGraph) -> np.ndarray:
    """Combinatorial Laplacian D - A (symmetric, PSD, zero row sums)."""
    return degree_matrix(g) - g.weights


def normalized_adjacency(g: SensorGraph) -> np.ndarray:
    """Self-loop-augmented, symmetrically normalized adjacency.

    With A' = A + I and D' its degree matrix, returns D'^(-1/2) A' D'^(-1/2).
    A' has strictly positive degrees, so the inverse square root always
    exists.
    """
    a_hat = g.weights + np.eye(g.n)
    d_inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * np.outer(d_inv_sqrt, d_inv_sqrt)


def connected_components(weights: np.ndarray) -> np.ndarray:
    """Component label per node (0-based), treating nonzero weights as edges."""
    n = weights.shape[0]
    labels = np.full(n, -1, dtype=int)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            u = stack.pop()
            for v in np.nonzero(weights[u])[0]:
                if labels[v] < 0:
                    labels[v] = current
                    stack.append(int(v))
        current += 1
    return labels

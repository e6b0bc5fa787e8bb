"""Reconstruct full graph signals from a sampled sensor subset.

With regularization tau > 0 the estimate minimizes
||M x - y||^2 + tau * x' L x, solved directly from the normal equations
(M'M + tau L) x = M' y. At tau = 0 the estimate interpolates: sampled nodes
are fixed to their observations and the remaining values minimize the
Laplacian quadratic form, which reduces to the linear system
L[U,U] x_U = -L[U,S] y on the unsampled set.

Solves use dense Cholesky factorizations; for a fixed mask the factorization
is built once and reused across timestep columns.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import (EmptyMaskError, EmptyWindowsError, ShapeMismatchError,
                     SingularSystemError)
from .graph import SensorGraph, connected_components, laplacian
from .signals import as_signal_values, window_steps


@dataclass(frozen=True)
class SampleMask:
    """Binary selection over sensors plus the budget it was searched under."""

    selected: np.ndarray
    budget: int = None

    def __post_init__(self):
        sel = np.asarray(self.selected, dtype=bool).ravel()
        budget = self.budget if self.budget is not None else int(sel.sum())
        sel.setflags(write=False)
        object.__setattr__(self, "selected", sel)
        object.__setattr__(self, "budget", int(budget))

    @property
    def n(self):
        return len(self.selected)

    @property
    def count(self):
        return int(self.selected.sum())

    @property
    def indices(self):
        return np.nonzero(self.selected)[0]

    @classmethod
    def from_indices(cls, indices, n, budget=None):
        sel = np.zeros(n, dtype=bool)
        sel[list(indices)] = True
        return cls(selected=sel, budget=budget)

    def to_json_dict(self, node_ids=None):
        if node_ids is not None:
            sel = [node_ids[i] for i in self.indices]
        else:
            sel = [int(i) for i in self.indices]
        return {"selected": sel, "budget": self.budget, "n": self.n}

    @classmethod
    def from_json_dict(cls, d, node_ids=None):
        n = int(d["n"]) if "n" in d else len(node_ids)
        sel = d["selected"]
        if node_ids is not None and sel and isinstance(sel[0], str):
            idx = [node_ids.index(s) for s in sel]
        else:
            idx = [int(i) for i in sel]
        return cls.from_indices(idx, n, budget=d.get("budget"))


@dataclass(frozen=True)
class ReconstructionProblem:
    graph: SensorGraph
    mask: SampleMask
    observed: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=float)
        if obs.shape[0] != self.mask.count:
            raise ShapeMismatchError(
                f"{obs.shape[0]} observations for {self.mask.count} sampled nodes")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        object.__setattr__(self, "observed", obs)


class MaskFactorization:
    """Cholesky factorization for a fixed (graph, mask, tau) triple.

    Solving for one vector or for a whole matrix of timestep columns costs
    one triangular solve per column against the cached factors.
    """

    def __init__(self, g: SensorGraph, mask: SampleMask, tau=0.0):
        if mask.n != g.n:
            raise ShapeMismatchError(f"mask length {mask.n} != graph size {g.n}")
        if mask.count == 0:
            raise EmptyMaskError("at least one sensor must be sampled")
        if tau < 0:
            raise ValueError("tau must be >= 0")
        self.graph = g
        self.mask = mask
        self.tau = float(tau)
        sel = mask.selected
        L = laplacian(g)

        labels = connected_components(g.weights)
        unsampled = sorted(set(labels) - set(labels[sel]))
        if unsampled and tau == 0.0:
            nodes = [g.node_ids[i] for i in np.nonzero(np.isin(labels, unsampled))[0]]
            raise SingularSystemError(
                f"components {unsampled} contain no sampled node "
                f"(unreachable sensors: {nodes})")

        try:
            if self.tau == 0.0:
                self._sel = sel
                self._unsel = ~sel
                self._l_us = L[np.ix_(self._unsel, sel)]
                if self._unsel.any():
                    self._factor = cho_factor(L[np.ix_(self._unsel, self._unsel)])
                else:
                    self._factor = None
            else:
                self._sel = sel
                system = np.diag(sel.astype(float)) + self.tau * L
                self._factor = cho_factor(system)
        except LinAlgError as exc:
            raise SingularSystemError(f"system not positive definite: {exc}") from exc

    def solve(self, observed):
        """Reconstruct from observations at the sampled nodes.

        ``observed`` has shape (count,) or (count, T); the result has shape
        (N,) or (N, T) accordingly.
        """
        y = np.asarray(observed, dtype=float)
        if y.shape[0] != self.mask.count:
            raise ShapeMismatchError(
                f"{y.shape[0]} observations for {self.mask.count} sampled nodes")
        out_shape = (self.mask.n,) + y.shape[1:]
        x = np.zeros(out_shape)
        if self.tau == 0.0:
            x[self._sel] = y
            if self._factor is not None:
                x[self._unsel] = cho_solve(self._factor, -self._l_us @ y)
        else:
            rhs = np.zeros(out_shape)
            rhs[self._sel] = y
            x[:] = cho_solve(self._factor, rhs)
        return x


def tikhonov_reconstruct(problem: ReconstructionProblem) -> np.ndarray:
    """Solve one reconstruction problem for a single signal vector."""
    return MaskFactorization(problem.graph, problem.mask,
                             problem.tau).solve(problem.observed)


def reconstruct_matrix(g: SensorGraph, mask: SampleMask, observed, tau=0.0):
    """Column-by-column reconstruction of an observation matrix (count, T)."""
    return MaskFactorization(g, mask, tau).solve(observed)


def reconstruction_rmse(original, reconstructed, windows) -> float:
    """Pooled RMSE over the union of event-window timesteps, all sensors.

    Quiet stretches between events carry almost no signal; scoring only the
    event windows keeps the error measure from being diluted by them.
    """
    orig = as_signal_values(original)
    recon = as_signal_values(reconstructed)
    if orig.shape != recon.shape:
        raise ShapeMismatchError(f"shapes differ: {orig.shape} vs {recon.shape}")
    windows = list(windows)
    if not windows:
        raise EmptyWindowsError("at least one event window is required")
    cols = window_steps(windows, n_steps=orig.shape[1])
    if len(cols) == 0:
        raise EmptyWindowsError("event windows cover no valid timesteps")
    diff = orig[:, cols] - recon[:, cols]
    return float(np.sqrt(np.mean(diff ** 2)))


class TikhonovReconstructor(BaseEstimator, TransformerMixin):
    """Transformer from observed-subset samples to full-network samples.

    X is (n_timesteps, n_selected) in mask-index order; transform returns
    (n_timesteps, n_sensors).
    """

    def __init__(self, graph=None, mask=None, tau=0.0):
        self.graph = graph
        self.mask = mask
        self.tau = tau

    def fit(self, X=None, y=None):
        if self.graph is None or self.mask is None:
            raise ValueError("graph and mask are required")
        self.factorization_ = MaskFactorization(self.graph, self.mask, self.tau)
        return self

    def transform(self, X):
        if not hasattr(self, "factorization_"):
            raise NotFittedError("call fit before transform")
        X = np.asarray(X, dtype=float)
        return self.factorization_.solve(X.T).T

"""Laplacian spectrum, graph Fourier transform, filtering, total variation.

The Fourier basis is the orthonormal eigenvector matrix of the combinatorial
Laplacian; eigenvalues play the role of graph frequencies. Filtering is a
point-wise gain on the spectral coefficients.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import (DimensionMismatchError, NonFiniteGainError,
                     NotSymmetricError)
from .graph import SensorGraph, _frozen, laplacian
from .signals import as_signal_values


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Laplacian.

    Column n of ``eigenvectors`` is the eigenvector for ``eigenvalues[n]``;
    the transpose acts as the forward Fourier transform.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def n(self):
        return len(self.eigenvalues)


@dataclass(frozen=True)
class FilterSpec:
    """Scalar gain as a function of graph frequency."""

    response: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"


def lowpass(alpha=0.5) -> FilterSpec:
    """Low-pass gain g(x) = 1 / (1 + alpha * x); unity at frequency zero."""
    return FilterSpec(response=lambda x: 1.0 / (1.0 + alpha * np.asarray(x)),
                      name=f"lowpass:{alpha:g}")


def identity_filter() -> FilterSpec:
    return FilterSpec(response=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                      name="identity")


def decompose(L: np.ndarray, sym_tol=1e-10) -> SpectralBasis:
    """Eigendecomposition of a symmetric Laplacian.

    Uses a symmetric solver so the spectrum is real and the basis is
    orthonormal. Sign convention: the largest-magnitude entry of each
    eigenvector is made positive (ties resolved to the lowest index), which
    pins an otherwise arbitrary per-column sign.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatchError(f"Laplacian must be square, got {L.shape}")
    if np.max(np.abs(L - L.T)) > sym_tol:
        raise NotSymmetricError("matrix is not symmetric within tolerance")
    eigenvalues, eigenvectors = np.linalg.eigh((L + L.T) / 2.0)
    for col in range(eigenvectors.shape[1]):
        v = eigenvectors[:, col]
        if v[np.argmax(np.abs(v))] < 0:
            eigenvectors[:, col] = -v
    return SpectralBasis(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def basis_for(g: SensorGraph) -> SpectralBasis:
    return decompose(laplacian(g))


def _check_len(basis, s):
    s = np.asarray(s, dtype=float)
    if s.shape[0] != basis.n:
        raise DimensionMismatchError(
            f"signal has {s.shape[0]} rows, basis expects {basis.n}")
    return s


def gft(basis: SpectralBasis, s):
    """Graph Fourier transform: project onto the eigenvector basis.

    Accepts a length-N vector or an (N, T) matrix of per-timestep columns.
    """
    s = _check_len(basis, s)
    return basis.eigenvectors.T @ s


def igft(basis: SpectralBasis, shat):
    """Inverse transform back to the vertex domain (exact inverse of gft)."""
    shat = _check_len(basis, shat)
    return basis.eigenvectors @ shat


def apply_filter(basis: SpectralBasis, s, filt: FilterSpec):
    """Point-wise spectral gain: igft(diag(g(lambda)) @ gft(s))."""
    s = _check_len(basis, s)
    gains = np.asarray(filt.response(basis.eigenvalues), dtype=float)
    if gains.shape != basis.eigenvalues.shape or not np.all(np.isfinite(gains)):
        raise NonFiniteGainError(
            f"filter {filt.name!r} has a non-finite gain on this spectrum")
    shat = basis.eigenvectors.T @ s
    shat = shat * (gains[:, None] if s.ndim == 2 else gains)
    return basis.eigenvectors @ shat


def total_variation(g: SensorGraph, s, per_node=False, shift="row_normalized"):
    """l1 deviation of a signal from its graph-shifted version.

    The default shift is the row-normalized adjacency (each node replaced by
    the weighted mean of its neighbors), so constant signals have zero
    variation and the result reads as a smoothness diagnostic. Isolated
    nodes contribute 0. ``shift="adjacency"`` uses the raw weighted
    adjacency instead (literal |s - A s|, degree-scaled).

    Matrix input (N, T) is handled column-wise; the global value is then a
    length-T vector.
    """
    s = np.asarray(s, dtype=float)
    if s.shape[0] != g.n:
        raise DimensionMismatchError(
            f"signal has {s.shape[0]} entries, graph has {g.n} nodes")
    deg = g.weights.sum(axis=1)
    if shift == "row_normalized":
        safe = np.where(deg > 0, deg, 1.0)
        per = np.abs(s - (g.weights / safe[:, None]) @ s)
        per[deg == 0] = 0.0
    elif shift == "adjacency":
        per = np.abs(s - g.weights @ s)
    else:
        raise ValueError(f"unknown shift {shift!r}")
    if per_node:
        return per
    total = per.sum(axis=0)
    return float(total) if s.ndim == 1 else total


class GraphLowPassFilter(BaseEstimator, TransformerMixin):
    """Transformer that low-pass filters each timestep over the graph.

    X is (n_timesteps, n_sensors); each row is filtered as one graph signal.
    """

    def __init__(self, graph=None, alpha=0.5):
        self.graph = graph
        self.alpha = alpha

    def fit(self, X=None, y=None):
        if self.graph is None:
            raise ValueError("a graph is required")
        self.basis_ = basis_for(self.graph)
        self.filter_ = lowpass(self.alpha)
        return self

    def transform(self, X):
        if not hasattr(self, "basis_"):
            raise NotFittedError("call fit before transform")
        X = np.asarray(X, dtype=float)
        return apply_filter(self.basis_, X.T, self.filter_).T


def filter_signal_matrix(g: SensorGraph, signals, filt: FilterSpec) -> np.ndarray:
    """Filter every column of an (N, T) signal matrix at once."""
    values = as_signal_values(signals)
    return apply_filter(basis_for(g), values, filt)

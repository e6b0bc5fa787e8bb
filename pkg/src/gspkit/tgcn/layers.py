"""Forward/backward layer implementations (numpy, batch-first).

Each layer owns its parameter arrays, caches what the backward pass needs
during forward, and accumulates parameter gradients into ``grads`` when
walked backwards. Gradients are exact; the test suite holds them to central
finite differences.
"""

import numpy as np


def _glorot(rng, shape):
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


def _sigmoid(x):
    # split by sign for overflow-free evaluation
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class GraphConv:
    """Graph convolution: ReLU(mixing @ H @ W + b), bias per node.

    ``mixing`` is a fixed (non-trainable) N x N spatial operator — the
    self-loop-normalized adjacency in the full model. The per-node bias is
    broadcast across output features.
    """

    def __init__(self, mixing, in_features, out_features, rng=None,
                 weight=None, bias=None):
        self.mixing = np.asarray(mixing, dtype=float)
        n = self.mixing.shape[0]
        if self.mixing.shape != (n, n):
            raise ValueError("mixing must be square")
        self.n_nodes = n
        self.in_features = in_features
        self.out_features = out_features
        self.weight = (np.asarray(weight, dtype=float) if weight is not None
                       else _glorot(rng, (in_features, out_features)))
        self.bias = (np.asarray(bias, dtype=float) if bias is not None
                     else np.zeros(n))
        self.grads = {"weight": np.zeros_like(self.weight),
                      "bias": np.zeros_like(self.bias)}
        self._cache = None

    def params(self):
        return {"weight": self.weight, "bias": self.bias}

    def param_count(self, include_mixing=True):
        trainable = self.weight.size + self.bias.size
        return trainable + (self.mixing.size if include_mixing else 0)

    def forward(self, h):
        """h: (B, N, F_in) -> (B, N, F_out)."""
        mixed = np.einsum("ij,bjf->bif", self.mixing, h)
        z = mixed @ self.weight + self.bias[None, :, None]
        out = np.maximum(z, 0.0)
        self._cache = (h, mixed, z)
        return out

    def backward(self, d_out):
        h, mixed, z = self._cache
        dz = d_out * (z > 0)
        self.grads["weight"] += np.einsum("bif,bio->fo", mixed, dz)
        self.grads["bias"] += dz.sum(axis=(0, 2))
        d_mixed = dz @ self.weight.T
        return np.einsum("ij,bjf->bif", self.mixing.T, d_mixed)


class Lstm:
    """Standard LSTM over (B, S, F) sequences, zero initial states.

    Gate layout along the last kernel axis is [input, forget, candidate,
    output]; the forget-gate bias starts at 1. ``return_sequence`` selects
    (B, S, U) output versus the final hidden state (B, U).
    """

    def __init__(self, in_features, units, rng=None, return_sequence=False,
                 kernel=None, recurrent=None, bias=None):
        self.in_features = in_features
        self.units = units
        self.return_sequence = return_sequence
        u = units
        self.kernel = (np.asarray(kernel, dtype=float) if kernel is not None
                       else _glorot(rng, (in_features, 4 * u)))
        self.recurrent = (np.asarray(recurrent, dtype=float)
                          if recurrent is not None
                          else _glorot(rng, (u, 4 * u)))
        if bias is not None:
            self.bias = np.asarray(bias, dtype=float)
        else:
            self.bias = np.zeros(4 * u)
            self.bias[u:2 * u] = 1.0
        self.grads = {"kernel": np.zeros_like(self.kernel),
                      "recurrent": np.zeros_like(self.recurrent),
                      "bias": np.zeros_like(self.bias)}
        self._cache = None

    def params(self):
        return {"kernel": self.kernel, "recurrent": self.recurrent,
                "bias": self.bias}

    def param_count(self):
        return self.kernel.size + self.recurrent.size + self.bias.size

    def forward(self, x):
        b, s, _ = x.shape
        u = self.units
        h = np.zeros((b, u))
        c = np.zeros((b, u))
        steps = []
        hidden = np.empty((b, s, u))
        for t in range(s):
            x_t = x[:, t]
            z = x_t @ self.kernel + h @ self.recurrent + self.bias
            i = _sigmoid(z[:, :u])
            f = _sigmoid(z[:, u:2 * u])
            g = np.tanh(z[:, 2 * u:3 * u])
            o = _sigmoid(z[:, 3 * u:])
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            h_new = o * tc
            steps.append((x_t, h, c, i, f, g, o, tc))
            h, c = h_new, c_new
            hidden[:, t] = h
        self._cache = (x.shape, steps)
        return hidden if self.return_sequence else h

    def backward(self, d_out):
        (b, s, _), steps = self._cache
        u = self.units
        dh_next = np.zeros((b, u))
        dc_next = np.zeros((b, u))
        dx = np.empty((b, s, self.in_features))
        for t in range(s - 1, -1, -1):
            x_t, h_prev, c_prev, i, f, g, o, tc = steps[t]
            if self.return_sequence:
                dh = d_out[:, t] + dh_next
            else:
                dh = dh_next + (d_out if t == s - 1 else 0.0)
            dc = dc_next + dh * o * (1.0 - tc ** 2)
            dz = np.concatenate([
                dc * g * i * (1.0 - i),          # input gate pre-activation
                dc * c_prev * f * (1.0 - f),     # forget gate
                dc * i * (1.0 - g ** 2),         # candidate
                dh * tc * o * (1.0 - o),         # output gate
            ], axis=1)
            self.grads["kernel"] += x_t.T @ dz
            self.grads["recurrent"] += h_prev.T @ dz
            self.grads["bias"] += dz.sum(axis=0)
            dx[:, t] = dz @ self.kernel.T
            dh_next = dz @ self.recurrent.T
            dc_next = dc * f
        return dx


class Dense:
    """Fully connected head with Tanh activation."""

    def __init__(self, in_features, out_features, rng=None, weight=None,
                 bias=None):
        self.weight = (np.asarray(weight, dtype=float) if weight is not None
                       else _glorot(rng, (in_features, out_features)))
        self.bias = (np.asarray(bias, dtype=float) if bias is not None
                     else np.zeros(out_features))
        self.grads = {"weight": np.zeros_like(self.weight),
                      "bias": np.zeros_like(self.bias)}
        self._cache = None

    def params(self):
        return {"weight": self.weight, "bias": self.bias}

    def param_count(self):
        return self.weight.size + self.bias.size

    def forward(self, x):
        out = np.tanh(x @ self.weight + self.bias)
        self._cache = (x, out)
        return out

    def backward(self, d_out):
        x, out = self._cache
        dz = d_out * (1.0 - out ** 2)
        self.grads["weight"] += x.T @ dz
        self.grads["bias"] += dz.sum(axis=0)
        return dz @ self.weight.T


class Dropout:
    """Inverted dropout; identity when inactive (inference or rng=None)."""

    def __init__(self, rate=0.2):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self._mask = None

    def forward(self, x, rng=None):
        if rng is None or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, d_out):
        return d_out if self._mask is None else d_out * self._mask

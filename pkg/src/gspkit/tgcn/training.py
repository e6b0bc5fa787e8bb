"""Mini-batch training loop with adaptive-moment updates."""

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergedLossError, EmptyTrainSetError
from .model import TgcnModel
from .windows import WindowSet


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    val_fraction: float = 0.1    # chronological tail of the train split
    patience: int = 20           # epochs of validation stall before stopping
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainResult:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    seconds_per_epoch: list = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def ms_per_epoch(self):
        if not self.seconds_per_epoch:
            return 0.0
        return 1000.0 * float(np.mean(self.seconds_per_epoch))


class _Adam:
    def __init__(self, params, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        c = self.cfg
        self.t += 1
        correct1 = 1.0 - c.beta1 ** self.t
        correct2 = 1.0 - c.beta2 ** self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = c.beta1 * self.m[k] + (1.0 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1.0 - c.beta2) * g * g
            m_hat = self.m[k] / correct1
            v_hat = self.v[k] / correct2
            p -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.eps)


def _eval_loss(model, inputs, targets_scaled, batch_size=256):
    total, count = 0.0, 0
    for lo in range(0, len(inputs), batch_size):
        pred = model.forward(inputs[lo:lo + batch_size])
        diff = pred - targets_scaled[lo:lo + batch_size]
        total += float(np.sum(diff ** 2))
        count += diff.size
    return total / max(count, 1)


def train(model: TgcnModel, ws: WindowSet, cfg: TrainConfig = TrainConfig()):
    """Minimize MSE on the train windows; returns a TrainResult.

    Deterministic under cfg.seed (shuffling and dropout share one seeded
    generator). Validation is the chronological tail of the train split;
    training stops once validation loss has not improved for cfg.patience
    epochs and the best-validation parameters are restored.
    """
    if len(ws.train_idx) == 0:
        raise EmptyTrainSetError("no training windows")
    rng = np.random.default_rng(cfg.seed)

    n_val = int(cfg.val_fraction * len(ws.train_idx))
    fit_idx = ws.train_idx[:len(ws.train_idx) - n_val]
    val_idx = ws.train_idx[len(ws.train_idx) - n_val:]
    if len(fit_idx) == 0:
        fit_idx, val_idx = ws.train_idx, ws.train_idx[:0]

    x_fit = ws.inputs[fit_idx]
    y_fit = model.scale_targets(ws.targets[fit_idx])
    x_val = ws.inputs[val_idx]
    y_val = model.scale_targets(ws.targets[val_idx])

    optimizer = _Adam(model.parameters(), cfg)
    result = TrainResult()
    best_val = np.inf
    best_params = {k: v.copy() for k, v in model.parameters().items()}
    stall = 0

    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(len(x_fit))
        epoch_loss, n_batches = 0.0, 0
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo:lo + cfg.batch_size]
            loss, grads = model.loss_and_grads(x_fit[batch], y_fit[batch],
                                               dropout_rng=rng)
            if not np.isfinite(loss):
                raise DivergedLossError(
                    f"non-finite loss {loss} in epoch {epoch}, "
                    f"batch {n_batches} (lr={cfg.learning_rate})")
            optimizer.step(model.parameters(), grads)
            epoch_loss += loss
            n_batches += 1
        result.train_loss.append(epoch_loss / max(n_batches, 1))
        val = (_eval_loss(model, x_val, y_val) if len(val_idx)
               else result.train_loss[-1])
        if not np.isfinite(val):
            raise DivergedLossError(f"non-finite validation loss in epoch {epoch}")
        result.val_loss.append(val)
        result.seconds_per_epoch.append(time.perf_counter() - t0)

        if val < best_val - 1e-12:
            best_val = val
            result.best_epoch = epoch
            best_params = {k: v.copy() for k, v in model.parameters().items()}
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                result.stopped_early = True
                break

    model.set_parameters(best_params)
    return result

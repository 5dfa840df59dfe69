"""Adam optimization, stop rules, and the training loop.

Everything downstream of a seed is deterministic: batch order, parameter
initialization (done at model construction), and the stop decision.  Two
models built with the same seed and widths start from identical weights,
which is what the paired-seed convergence comparison relies on.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TrainingDivergenceError
from .rng import Rng


@dataclass
class Adam:
    """Adam with bias correction.  Weight decay defaults to the classic
    L2 form (decay * w added to the gradient); ``decoupled=True`` applies
    it directly to the parameters instead."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    weight_decay: float = 0.0
    decoupled: bool = False

    def __post_init__(self):
        self.step_count = 0
        self._m = None
        self._v = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]):
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(params) != len(self._m) or len(grads) != len(params):
            raise ShapeError("parameter/gradient structure changed between steps")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            if not np.all(np.isfinite(g)):
                raise TrainingDivergenceError("non-finite gradient in optimizer step")
            if self.weight_decay and not self.decoupled:
                g = g + self.weight_decay * p
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps_hat)
            if self.weight_decay and self.decoupled:
                update = update + self.weight_decay * p
            p -= self.lr * update


@dataclass(frozen=True)
class EarlyStopping:
    patience: int = 20
    min_delta: float = 0.0
    restore_best: bool = True

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class Threshold:
    value: float

    def __post_init__(self):
        if not self.value > 0.0:
            raise ValueError("threshold must be positive")


@dataclass(frozen=True)
class MaxEpochs:
    n: int = 2000

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("epoch cap must be >= 0")


StopRule = EarlyStopping | Threshold | MaxEpochs


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    weight_decay: float = 0.05
    batch_size: int = 16
    stop_rules: tuple[StopRule, ...] = (EarlyStopping(), MaxEpochs(2000))
    seed: int = 0
    smoothing: float | None = None
    decoupled_decay: bool = False


@dataclass
class TrainingReport:
    train_losses: list[float]
    val_losses: list[float]
    epochs_run: int
    stop_reason: str  # "threshold" | "early_stopping" | "max_epochs"
    seed: int
    wall_clock_millis: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "train_losses": self.train_losses,
                "val_losses": self.val_losses,
                "epochs_run": self.epochs_run,
                "stop_reason": self.stop_reason,
                "seed": self.seed,
                "wall_clock_millis": self.wall_clock_millis,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "TrainingReport":
        return cls(**json.loads(text))


def train_step(model, batch_x, batch_y, optimizer: Adam, smoothing: float | None = None) -> float:
    """One forward/backward/update; returns the pre-update batch loss."""
    loss, grads = model.loss_and_grads(batch_x, batch_y, smoothing)
    if not np.isfinite(loss):
        raise TrainingDivergenceError(f"non-finite training loss {loss}")
    optimizer.step(model.parameters(), grads)
    return loss


def fit(model, train, val, config: TrainConfig) -> TrainingReport:
    """Mini-batch training until a stop rule fires.

    ``train`` and ``val`` expose ``X`` and ``y``.  Batches are reshuffled
    each epoch from the config seed.  The validation metric is the raw
    composite loss on the model's own evaluation path (sorted for
    SCQRNN/CQRNNse, unsorted for CQRNN), measured after each epoch.  Rule
    precedence within an epoch: threshold, then early stopping, then the
    epoch cap.
    """
    start = time.perf_counter()
    X, y = model.training_data(train.X, train.y)
    n = y.shape[0]
    if n == 0 or val.y.shape[0] == 0:
        raise ValueError("training and validation sets must be non-empty")
    rng = Rng(config.seed)
    optimizer = Adam(lr=config.lr, weight_decay=config.weight_decay, decoupled=config.decoupled_decay)

    threshold = next((r for r in config.stop_rules if isinstance(r, Threshold)), None)
    early = next((r for r in config.stop_rules if isinstance(r, EarlyStopping)), None)
    cap = min((r.n for r in config.stop_rules if isinstance(r, MaxEpochs)), default=MaxEpochs().n)

    train_losses: list[float] = []
    val_losses: list[float] = []
    best_val = np.inf
    best_params = None
    stall = 0
    stop_reason = "max_epochs"
    epochs_run = 0

    for epoch in range(cap):
        order = rng.permutation(n)
        loss_sum = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            try:
                loss = train_step(model, X[idx], y[idx], optimizer, config.smoothing)
            except TrainingDivergenceError as err:
                raise TrainingDivergenceError(f"{err} (epoch {epoch + 1})", epoch=epoch + 1) from None
            loss_sum += loss * idx.size
        train_losses.append(loss_sum / n)

        val_loss = model.evaluation_loss(val.X, val.y)
        if not np.isfinite(val_loss):
            raise TrainingDivergenceError(f"non-finite validation loss (epoch {epoch + 1})", epoch=epoch + 1)
        val_losses.append(val_loss)
        epochs_run = epoch + 1

        if early is not None:
            if val_loss < best_val - early.min_delta:
                best_val = val_loss
                stall = 0
                if early.restore_best:
                    best_params = [p.copy() for p in model.parameters()]
            else:
                stall += 1
        if threshold is not None and val_loss < threshold.value:
            stop_reason = "threshold"
            break
        if early is not None and stall >= early.patience:
            stop_reason = "early_stopping"
            break

    if stop_reason != "threshold" and early is not None and early.restore_best and best_params is not None:
        for current, best in zip(model.parameters(), best_params):
            current[...] = best

    return TrainingReport(
        train_losses=train_losses,
        val_losses=val_losses,
        epochs_run=epochs_run,
        stop_reason=stop_reason,
        seed=config.seed,
        wall_clock_millis=(time.perf_counter() - start) * 1e3,
    )

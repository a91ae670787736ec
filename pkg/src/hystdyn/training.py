"""Teacher-forced training of the recurrent network with Adam.

The training split is chopped into fixed-length subsequences that each start
from a zero recurrent state. Subsequences are shuffled every epoch and
grouped into batches; one optimizer step is taken per batch on the mean
squared error of the scaled angle prediction.
"""

from __future__ import annotations

import copy
import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .features import InputConfig, Scalers, window_matrix
from .lstm import LstmNetwork, forward, backward, init_network
from .numerics import make_rng
from .timeseries import TimeSeries, split_train_val

HISTORY_HEADER = ("epoch", "train_mse", "val_mse", "val_rmse_deg")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    bptt_length: int = 50
    batch_timesteps: int = 100
    train_fraction: float = 0.67
    hidden_size: int = 64
    dense_size: int = 64
    unit_forget_bias: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.bptt_length < 2:
            raise ValueError("bptt_length must be at least 2")
        if self.batch_timesteps < self.bptt_length:
            raise ValueError("batch_timesteps must cover at least one subsequence")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def rmse(pred: np.ndarray, target: np.ndarray) -> float:
    return float(np.sqrt(mse(pred, target)))


class Adam:
    """Adam with bias correction, optionally followed by decoupled L2 decay.

    Moment buffers are keyed by parameter name and updated in place.
    """

    def __init__(
        self,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ) -> None:
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        if set(params) != set(grads):
            raise ValueError("parameter and gradient names differ")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr1 = 1.0 - b1**self.t
        corr2 = 1.0 - b2**self.t
        for name, p in params.items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g**2
            p -= self.learning_rate * (m / corr1) / (np.sqrt(v / corr2) + self.eps)
            if self.weight_decay > 0.0:
                p -= self.learning_rate * self.weight_decay * p


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_mse: float
    val_mse: float
    val_rmse_deg: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def append(self, rec: EpochRecord) -> None:
        self.records.append(rec)

    def best_epoch(self) -> int:
        """Epoch with the lowest validation MSE (first on ties)."""
        if not self.records:
            raise ValueError("history is empty")
        return min(self.records, key=lambda r: (r.val_mse, r.epoch)).epoch

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(HISTORY_HEADER)
            for r in self.records:
                writer.writerow([r.epoch, repr(r.train_mse), repr(r.val_mse), repr(r.val_rmse_deg)])


@dataclass
class TrainResult:
    """Best-validation network plus everything needed to reuse it."""

    network: LstmNetwork
    scalers: Scalers
    input_config: InputConfig
    history: TrainHistory
    config: TrainConfig
    best_epoch: int


def _subsequence_bounds(total: int, length: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into runs of ``length``; a short tail is kept."""
    bounds = [(s, min(s + length, total)) for s in range(0, total, length)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < 2:
        # A 1-step tail carries no recurrence; fold it into the previous run.
        last = bounds.pop()
        prev = bounds.pop()
        bounds.append((prev[0], last[1]))
    return bounds


def train(
    series: TimeSeries,
    input_config: InputConfig,
    config: TrainConfig = TrainConfig(),
    progress=None,
) -> TrainResult:
    """Fit the network on the leading fraction of ``series``.

    Scalers are fit on the training split only. Validation error is the
    teacher-forced one-step MSE over the trailing split; the returned network
    carries the parameters of the best validation epoch.
    """
    train_part, val_part = split_train_val(series, config.train_fraction)
    scalers = Scalers.fit(train_part)
    x_train, y_train = window_matrix(train_part, input_config, scalers)
    x_val, y_val = window_matrix(val_part, input_config, scalers)

    rng = make_rng(config.seed)
    net = init_network(
        rng,
        n=input_config.window_dim,
        hidden_size=config.hidden_size,
        dense_size=config.dense_size,
        unit_forget_bias=config.unit_forget_bias,
    )
    opt = Adam(
        learning_rate=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
        weight_decay=config.weight_decay,
    )

    bounds = _subsequence_bounds(x_train.shape[0], config.bptt_length)
    per_batch = max(1, config.batch_timesteps // config.bptt_length)
    params = net.named_arrays()
    history = TrainHistory()
    best_val = np.inf
    best_epoch = -1
    best_params: dict[str, np.ndarray] = {}

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(bounds))
        for k in range(0, len(order), per_batch):
            chunk = [bounds[j] for j in order[k : k + per_batch]]
            total = sum(e - s for s, e in chunk)
            grads_sum: dict[str, np.ndarray] | None = None
            batch_loss = 0.0
            for s, e in chunk:
                preds, _, cache = forward(net, x_train[s:e])
                err = preds - y_train[s:e]
                batch_loss += float(np.sum(err**2))
                g = backward(net, cache, 2.0 * err / total)
                if grads_sum is None:
                    grads_sum = g
                else:
                    for name in grads_sum:
                        grads_sum[name] += g[name]
            if not np.isfinite(batch_loss):
                raise DivergenceError(f"non-finite training loss in epoch {epoch}")
            assert grads_sum is not None
            opt.step(params, grads_sum)

        train_preds, _, _ = forward(net, x_train)
        val_preds, _, _ = forward(net, x_val)
        train_mse = mse(train_preds, y_train)
        val_mse = mse(val_preds, y_val)
        if not (np.isfinite(train_mse) and np.isfinite(val_mse)):
            raise DivergenceError(f"non-finite epoch loss in epoch {epoch}")
        record = EpochRecord(
            epoch=epoch,
            train_mse=train_mse,
            val_mse=val_mse,
            val_rmse_deg=float(np.sqrt(val_mse)) * scalers.angle.range_deg,
        )
        history.append(record)
        if progress is not None:
            progress(record)
        if val_mse < best_val:
            best_val = val_mse
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}

    for name, value in best_params.items():
        params[name][...] = value
    return TrainResult(
        network=net,
        scalers=scalers,
        input_config=input_config,
        history=history,
        config=config,
        best_epoch=best_epoch,
    )

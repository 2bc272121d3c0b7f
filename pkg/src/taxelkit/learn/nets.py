"""Gradient-trained classifiers: MLP, 1-D CNN and LSTM, plus the shared loop.

Training is deterministic for a fixed seed: one Generator drives init and
epoch shuffling, batches run single-threaded, and the returned model carries
the parameters of the best validation-accuracy epoch (early stopping).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import stratified_split_indices
from ..pipeline import FeatureKind
from . import layers
from .optim import adam_step, init_adam

logger = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


@dataclass(frozen=True)
class MLPConfig:
    input_dim: int = 150
    hidden_dims: tuple[int, ...] = (256, 128, 64)
    output_dim: int = 6
    learning_rate: float = 0.00025
    batch_size: int = 32
    max_epochs: int = 300
    patience: int = 20
    val_fraction: float = 0.8  # train share when no validation set is passed
    seed: int = 0

    def __post_init__(self):
        if self.output_dim != 6:
            raise ValueError("classifier head is fixed at 6 gesture classes")
        if len(self.hidden_dims) != 3:
            raise ValueError("expected exactly three hidden layers")


@dataclass(frozen=True)
class CNN1DConfig:
    input_len: int = 150
    channels: tuple[int, int] = (16, 32)
    kernel_width: int = 5
    pool_width: int = 2
    dense_dim: int = 64
    output_dim: int = 6
    learning_rate: float = 0.001
    batch_size: int = 32
    max_epochs: int = 300
    patience: int = 20
    val_fraction: float = 0.8
    seed: int = 0


@dataclass(frozen=True)
class LSTMConfig:
    input_len: int = 150
    hidden_size: int = 64
    output_dim: int = 6
    learning_rate: float = 0.0001
    batch_size: int = 32
    max_epochs: int = 300
    patience: int = 20
    val_fraction: float = 0.8
    seed: int = 0


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    best_epoch: int = -1

    def to_dict(self) -> dict:
        return {
            "train_loss": self.train_loss,
            "train_acc": self.train_acc,
            "val_loss": self.val_loss,
            "val_acc": self.val_acc,
            "best_epoch": self.best_epoch,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainingHistory":
        return cls(
            train_loss=list(doc.get("train_loss", [])),
            train_acc=list(doc.get("train_acc", [])),
            val_loss=list(doc.get("val_loss", [])),
            val_acc=list(doc.get("val_acc", [])),
            best_epoch=int(doc.get("best_epoch", -1)),
        )


class _Network:
    """Stack of layers ending in logits; subclasses define the stack."""

    layers: list
    n_classes: int

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        grad = dlogits
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray) -> float:
        logits = self.forward(x)
        loss, dlogits = layers.softmax_cross_entropy(logits, y)
        self.backward(dlogits)
        return loss

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def load_params(self, values: Sequence[np.ndarray]) -> None:
        own = self.params()
        if len(own) != len(values):
            raise ValueError("parameter count mismatch")
        for p, v in zip(own, values):
            p[...] = v

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        return x

    def predict_proba(self, x: np.ndarray, batch: int = 256) -> np.ndarray:
        x = self._prepare(np.asarray(x, dtype=np.float64))
        chunks = [
            layers.softmax(self.forward(x[i : i + batch]))
            for i in range(0, x.shape[0], batch)
        ]
        return np.concatenate(chunks)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {f"p{i:03d}": p for i, p in enumerate(self.params())}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        self.load_params([arrays[f"p{i:03d}"] for i in range(len(self.params()))])


class MLPNet(_Network):
    def __init__(self, config: MLPConfig, rng: np.random.Generator):
        self.config = config
        self.n_classes = config.output_dim
        dims = [config.input_dim, *config.hidden_dims]
        self.layers = []
        for a, b in zip(dims[:-1], dims[1:]):
            self.layers += [layers.Dense(a, b, rng), layers.ReLU()]
        self.layers.append(layers.Dense(dims[-1], config.output_dim, rng))


class CNN1DNet(_Network):
    def __init__(self, config: CNN1DConfig, rng: np.random.Generator):
        self.config = config
        self.n_classes = config.output_dim
        c1, c2 = config.channels
        k, pw = config.kernel_width, config.pool_width
        self.layers = [
            layers.Conv1D(1, c1, k, rng),
            layers.ReLU(),
            layers.MaxPool1D(pw),
            layers.Conv1D(c1, c2, k, rng),
            layers.ReLU(),
            layers.MaxPool1D(pw),
            layers.Flatten(),
        ]
        flat = self._flat_dim(config)
        self.layers += [
            layers.Dense(flat, config.dense_dim, rng),
            layers.ReLU(),
            layers.Dense(config.dense_dim, config.output_dim, rng),
        ]

    @staticmethod
    def _flat_dim(config: CNN1DConfig) -> int:
        length = config.input_len
        length = (length - config.kernel_width + 1) // config.pool_width
        length = (length - config.kernel_width + 1) // config.pool_width
        if length < 1:
            raise ValueError("input too short for the conv/pool stack")
        return length * config.channels[1]

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        return x[:, :, None]  # sequence as one channel


class LSTMNet(_Network):
    def __init__(self, config: LSTMConfig, rng: np.random.Generator):
        self.config = config
        self.n_classes = config.output_dim
        self.layers = [
            layers.LSTMLayer(1, config.hidden_size, rng),
            layers.Dense(config.hidden_size, config.output_dim, rng),
        ]

    def _prepare(self, x: np.ndarray) -> np.ndarray:
        return x[:, :, None]


@dataclass(eq=False)
class TrainedModel:
    """A trained classifier tagged with the feature kind it expects."""

    kind: str
    feature_kind: FeatureKind | None
    net: object
    config: object
    history: TrainingHistory | None

    @property
    def n_classes(self) -> int:
        return self.net.n_classes

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.net.predict(np.asarray(x, dtype=np.float64))

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.net.predict_proba(np.asarray(x, dtype=np.float64))


def _accuracy(net: _Network, x: np.ndarray, y: np.ndarray, batch: int = 512) -> float:
    preds = np.concatenate(
        [net.predict(x[i : i + batch]) for i in range(0, x.shape[0], batch)]
    )
    return float((preds == y).mean())


def _epoch_loss(net: _Network, x: np.ndarray, y: np.ndarray, batch: int = 512) -> float:
    total = 0.0
    for i in range(0, x.shape[0], batch):
        logits = net.forward(net._prepare(x[i : i + batch]))
        loss, _ = layers.softmax_cross_entropy(logits, y[i : i + batch])
        total += loss * (min(i + batch, x.shape[0]) - i)
    return total / x.shape[0]


def _fit(
    net: _Network,
    X: np.ndarray,
    y: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    learning_rate: float,
    batch_size: int,
    max_epochs: int,
    patience: int,
    rng: np.random.Generator,
) -> TrainingHistory:
    params = net.params()
    state = init_adam(params)
    history = TrainingHistory()
    best_acc = -1.0
    best_params = [p.copy() for p in params]
    since_best = 0
    n = X.shape[0]
    for epoch in range(max_epochs):
        order = rng.permutation(n)
        for i in range(0, n, batch_size):
            idx = order[i : i + batch_size]
            loss = net.loss_and_grads(net._prepare(X[idx]), y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}", epoch)
            new_params, state = adam_step(params, net.grads(), state, learning_rate)
            net.load_params(new_params)
        history.train_loss.append(_epoch_loss(net, X, y))
        history.train_acc.append(_accuracy(net, X, y))
        history.val_loss.append(_epoch_loss(net, X_val, y_val))
        history.val_acc.append(_accuracy(net, X_val, y_val))
        if history.val_acc[-1] > best_acc:
            best_acc = history.val_acc[-1]
            best_params = [p.copy() for p in params]
            history.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= patience:
                break
    net.load_params(best_params)
    return history


def _resolve_val(X, y, val, val_fraction, seed):
    if val is not None:
        return X, y, np.asarray(val[0], dtype=np.float64), np.asarray(val[1])
    rng = np.random.default_rng(seed)
    tr_idx, val_idx = stratified_split_indices(y, val_fraction, rng)
    return X[tr_idx], y[tr_idx], X[val_idx], y[val_idx]


def _train_net(net_cls, config, X, y, val, feature_kind) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if np.unique(y).size < 2:
        raise ValueError("training needs at least two classes present")
    X_tr, y_tr, X_val, y_val = _resolve_val(X, y, val, config.val_fraction, config.seed)
    rng = np.random.default_rng(config.seed)
    net = net_cls(config, rng)
    history = _fit(
        net,
        X_tr,
        y_tr,
        X_val,
        y_val,
        config.learning_rate,
        config.batch_size,
        config.max_epochs,
        config.patience,
        rng,
    )
    logger.info(
        "%s trained: best val acc %.4f at epoch %d (%d epochs run)",
        net_cls.__name__,
        max(history.val_acc),
        history.best_epoch,
        len(history.val_acc),
    )
    kind = {"MLPNet": "mlp", "CNN1DNet": "cnn1d", "LSTMNet": "lstm"}[net_cls.__name__]
    return TrainedModel(kind, feature_kind, net, config, history)


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    config: MLPConfig | None = None,
    val: tuple[np.ndarray, np.ndarray] | None = None,
    feature_kind: FeatureKind | None = None,
) -> TrainedModel:
    """Train the dense classifier; `val` overrides the internal 80/20 split."""
    config = config or MLPConfig(input_dim=np.asarray(X).shape[1])
    return _train_net(MLPNet, config, X, y, val, feature_kind)


def train_cnn1d(
    X: np.ndarray,
    y: np.ndarray,
    config: CNN1DConfig | None = None,
    val: tuple[np.ndarray, np.ndarray] | None = None,
    feature_kind: FeatureKind | None = None,
) -> TrainedModel:
    config = config or CNN1DConfig(input_len=np.asarray(X).shape[1])
    return _train_net(CNN1DNet, config, X, y, val, feature_kind)


def train_lstm(
    X: np.ndarray,
    y: np.ndarray,
    config: LSTMConfig | None = None,
    val: tuple[np.ndarray, np.ndarray] | None = None,
    feature_kind: FeatureKind | None = None,
) -> TrainedModel:
    config = config or LSTMConfig(input_len=np.asarray(X).shape[1])
    return _train_net(LSTMNet, config, X, y, val, feature_kind)

"""Feed-forward dialect classifier with hand-written backprop and Adam.

Network: input -> 256 -> 128 -> 64 -> 32 -> n_classes, each hidden layer an
affine map followed by the activation, inverted dropout after the first
hidden layer only, softmax cross-entropy on the output logits.
"""
from __future__ import annotations

import copy
import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import DIALECTS
from .fmx import read_fmx_sequence, to_bytes
from .rng import Xoshiro256, derive_seed

SHUFFLE_SALT = 0x73687566  # "shuf"
DROPOUT_SALT = 0x64726F70  # "drop"
CHECKPOINT_MAGIC = b"FMXC"


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int
    layer_sizes: tuple[int, ...] = (256, 128, 64, 32)
    n_classes: int = 4
    dropout_p: float = 0.1
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        if self.input_dim <= 0:
            raise ValueError("input_dim must be positive")
        if not self.layer_sizes:
            raise ValueError("layer_sizes must not be empty")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))


@dataclass(frozen=True)
class Hyperparams:
    lr: float = 1e-4
    epochs: int = 50
    batch_size: int = 100
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.lr < 0 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("lr must be >= 0, epochs and batch_size >= 1")


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z, a):
    return (z > 0).astype(z.dtype)


def _tanh_grad(z, a):
    return 1.0 - a * a


_ACTIVATIONS = {
    "relu": (_relu, _relu_grad),
    "tanh": (np.tanh, _tanh_grad),
}


@dataclass
class ModelParams:
    config: ModelConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, [w.copy() for w in self.weights],
                           [b.copy() for b in self.biases])


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = 0


def layer_shapes(config: ModelConfig) -> list[tuple[int, int]]:
    sizes = [config.input_dim, *config.layer_sizes, config.n_classes]
    return list(zip(sizes[:-1], sizes[1:]))


def init_model(config: ModelConfig) -> ModelParams:
    """Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    weights, biases = [], []
    for fan_in, fan_out in layer_shapes(config):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ModelParams(config, weights, biases)


def dropout_mask(shape, p: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: kept units scaled by 1 / (1 - p)."""
    if p == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= p) / (1.0 - p)


def _check_input(params: ModelParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.config.input_dim:
        raise ValueError(
            f"input has {x.shape[-1]} dims, model expects {params.config.input_dim}"
        )
    return x


def _forward(params: ModelParams, x: np.ndarray, mask: np.ndarray | None):
    act, _ = _ACTIVATIONS[params.config.activation]
    cache = []
    h = x
    n_hidden = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if i == n_hidden:
            cache.append((h, z, None, None))
            return z, cache
        a = act(z)
        m = mask if (i == 0 and mask is not None) else None
        cache.append((h, z, a, m))
        h = a * m if m is not None else a
    raise AssertionError("unreachable")


def forward(params: ModelParams, batch, train_mode: bool = False,
            dropout_seed: int | None = None) -> np.ndarray:
    """Logits of shape ``(batch, n_classes)``.

    ``train_mode`` draws an inverted-dropout mask for the first hidden layer
    from ``dropout_seed``; evaluation mode never touches the seed.
    """
    x = _check_input(params, batch)
    mask = None
    if train_mode and params.config.dropout_p > 0:
        rng = np.random.Generator(np.random.PCG64(dropout_seed or 0))
        mask = dropout_mask((x.shape[0], params.config.layer_sizes[0]),
                            params.config.dropout_p, rng)
    return _forward(params, x, mask)[0]


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(np.asarray(logits, dtype=np.float64)))


def _check_labels(labels, n: int, n_classes: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if y.shape[0] != n:
        raise ValueError("labels and batch differ in length")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    return y


def cross_entropy(logits, labels) -> float:
    """Mean negative log-likelihood with log-sum-exp stabilisation."""
    logits = np.asarray(logits, dtype=np.float64)
    y = _check_labels(labels, logits.shape[0], logits.shape[1])
    return float(-log_softmax(logits)[np.arange(len(y)), y].mean())


def loss_and_grads(params: ModelParams, batch, labels, mask: np.ndarray | None = None):
    """Batch loss and its exact gradients, ordered like ``params.arrays()``."""
    x = _check_input(params, batch)
    y = _check_labels(labels, x.shape[0], params.config.n_classes)
    _, act_grad = _ACTIVATIONS[params.config.activation]
    logits, cache = _forward(params, x, mask)
    logp = log_softmax(logits)
    n = x.shape[0]
    loss = float(-logp[np.arange(n), y].mean())

    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = [None] * (2 * len(params.weights))
    for i in range(len(params.weights) - 1, -1, -1):
        h_in, z, a, m = cache[i]
        if i < len(params.weights) - 1:
            if m is not None:
                delta = delta * m
            delta = delta * act_grad(z, a)
        grads[2 * i] = h_in.T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i:
            delta = delta @ params.weights[i].T
    return loss, grads


def backward(params: ModelParams, batch, labels) -> list[np.ndarray]:
    """Gradients of the dropout-free mean cross-entropy w.r.t. every parameter."""
    return loss_and_grads(params, batch, labels)[1]


class Adam:
    def __init__(self, params: ModelParams, hp: Hyperparams):
        self.hp = hp
        self.t = 0
        self.m = [np.zeros_like(p) for p in params.arrays()]
        self.v = [np.zeros_like(p) for p in params.arrays()]

    def step(self, params: ModelParams, grads) -> None:
        hp = self.hp
        self.t += 1
        c1 = 1.0 - hp.adam_beta1**self.t
        c2 = 1.0 - hp.adam_beta2**self.t
        for p, g, m, v in zip(params.arrays(), grads, self.m, self.v):
            m *= hp.adam_beta1
            m += (1.0 - hp.adam_beta1) * g
            v *= hp.adam_beta2
            v += (1.0 - hp.adam_beta2) * g * g
            p -= hp.lr * (m / c1) / (np.sqrt(v / c2) + hp.adam_eps)


def accuracy(params: ModelParams, x, y) -> float:
    pred = np.argmax(forward(params, x), axis=1)
    return float(np.mean(pred == np.asarray(y)))


def train(config: ModelConfig, hp: Hyperparams, train_set, val_set):
    """Train from scratch and return the best-validation snapshot and history.

    ``train_set`` and ``val_set`` are ``(X, y)`` pairs with integer labels.
    Each epoch reshuffles the training data (Fisher-Yates, seeded from
    ``config.seed``) and uses every batch including a final short one.
    Validation accuracy is plain accuracy in eval mode; ties keep the earlier
    epoch. History losses and train accuracy are eval-mode, end-of-epoch.
    """
    x_tr, y_tr = np.asarray(train_set[0], dtype=np.float64), np.asarray(train_set[1])
    x_va, y_va = np.asarray(val_set[0], dtype=np.float64), np.asarray(val_set[1])
    if len(x_tr) == 0 or len(x_va) == 0:
        raise ValueError("training and validation sets must be nonempty")
    if x_tr.ndim != 2 or x_va.ndim != 2 or x_tr.shape[1] != config.input_dim \
            or x_va.shape[1] != config.input_dim:
        raise ValueError(f"feature dims must equal input_dim={config.input_dim}")
    if len(x_tr) != len(y_tr) or len(x_va) != len(y_va):
        raise ValueError("features and labels differ in length")

    params = init_model(config)
    opt = Adam(params, hp)
    order_rng = Xoshiro256(derive_seed(config.seed, SHUFFLE_SALT))
    mask_rng = np.random.Generator(np.random.PCG64(derive_seed(config.seed, DROPOUT_SALT)))
    history = TrainingHistory()
    best, best_acc = params.copy(), -1.0
    width = config.layer_sizes[0]
    for epoch in range(hp.epochs):
        order = np.asarray(order_rng.permutation(len(x_tr)))
        for start in range(0, len(order), hp.batch_size):
            idx = order[start:start + hp.batch_size]
            mask = None
            if config.dropout_p > 0:
                mask = dropout_mask((len(idx), width), config.dropout_p, mask_rng)
            _, grads = loss_and_grads(params, x_tr[idx], y_tr[idx], mask)
            opt.step(params, grads)
        logits = forward(params, x_tr)
        history.train_loss.append(cross_entropy(logits, y_tr))
        history.train_accuracy.append(float(np.mean(np.argmax(logits, 1) == y_tr)))
        val_acc = accuracy(params, x_va, y_va)
        history.val_accuracy.append(val_acc)
        if val_acc > best_acc:
            best, best_acc, history.best_epoch = params.copy(), val_acc, epoch
    return best, history


def predict_proba(params: ModelParams, batch) -> np.ndarray:
    return softmax(forward(params, batch))


def predict(params: ModelParams, vector) -> tuple[str, np.ndarray]:
    """Most probable dialect (ties go to the lowest index) and the posterior."""
    post = predict_proba(params, vector)[0]
    return DIALECTS[int(np.argmax(post))], post


def save_checkpoint(path, params: ModelParams, hp: Hyperparams | None = None,
                    history: TrainingHistory | None = None, extra: dict | None = None) -> None:
    """Write ``b"FMXC" | uint32 header_len | JSON header | FMX blocks``.

    Blocks follow the order W1, b1, W2, b2, ...; biases are stored as 1 x n.
    Parameters are stored as float32.
    """
    header = {
        "config": asdict(params.config),
        "hyperparams": asdict(hp) if hp else None,
        "best_epoch": history.best_epoch if history else None,
        "history": asdict(history) if history else None,
        "n_blocks": 2 * len(params.weights),
        **(extra or {}),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC + struct.pack("<I", len(blob)) + blob)
        for w, b in zip(params.weights, params.biases):
            fh.write(to_bytes(w))
            fh.write(to_bytes(b[None, :]))


def load_checkpoint(path) -> tuple[ModelParams, dict]:
    with open(path, "rb") as fh:
        if fh.read(4) != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (n,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(n).decode("utf-8"))
        blocks = read_fmx_sequence(fh, header["n_blocks"])
    cfg = header["config"]
    cfg["layer_sizes"] = tuple(cfg["layer_sizes"])
    config = ModelConfig(**cfg)
    weights = [blk.values.astype(np.float64) for blk in blocks[0::2]]
    biases = [blk.values[0].astype(np.float64) for blk in blocks[1::2]]
    params = ModelParams(config, weights, biases)
    if [w.shape for w in weights] != layer_shapes(config):
        raise ValueError(f"{path}: weight shapes do not match the stored config")
    return params, header

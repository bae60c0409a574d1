"""Dense feed-forward autoencoder in plain numpy.

Weights are stored as ``(out_width, in_width)`` matrices, so a layer maps a
batch ``x`` of shape ``(B, in_width)`` to ``act(x @ W.T + b)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, DivergenceError

RELU = "relu"
SIGMOID = "sigmoid"
IDENTITY = "identity"
ACTIVATIONS = (RELU, SIGMOID, IDENTITY)
PRECISIONS = ("float32", "float64")


@dataclass(frozen=True)
class ArchSpec:
    """Symmetric hourglass: input -> hidden... -> latent -> reversed hidden -> input."""

    input_dim: int = 784
    hidden_dims: tuple[int, ...] = (512, 384)
    latent_dim: int = 256

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        widths = (self.input_dim, *self.hidden_dims, self.latent_dim)
        for w in widths:
            if not isinstance(w, (int, np.integer)) or w < 2:
                raise ConfigError(f"all layer widths must be integers >= 2, got {widths}")

    @property
    def widths(self) -> tuple[int, ...]:
        """Full width chain, e.g. (784, 512, 384, 256, 384, 512, 784)."""
        enc = (self.input_dim, *self.hidden_dims, self.latent_dim)
        return enc + enc[-2::-1]

    @property
    def n_layers(self) -> int:
        return 2 * (len(self.hidden_dims) + 1)


@dataclass
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str = RELU

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionError(
                f"bias shape {self.bias.shape} does not match weights {self.weights.shape}"
            )

    @property
    def in_width(self) -> int:
        return self.weights.shape[1]

    @property
    def out_width(self) -> int:
        return self.weights.shape[0]

    @property
    def n_params(self) -> int:
        return self.weights.size + self.bias.size


@dataclass
class Autoencoder:
    """Chain of dense layers.

    ``arch`` is the architecture the model was built from. After structured
    pruning the layer widths shrink but ``arch`` still names the baseline, which
    is what sparsity is measured against.
    """

    layers: list[DenseLayer]
    arch: ArchSpec

    def __post_init__(self):
        for k in range(len(self.layers) - 1):
            if self.layers[k].out_width != self.layers[k + 1].in_width:
                raise DimensionError(
                    f"layer {k} outputs {self.layers[k].out_width} but layer {k + 1} "
                    f"expects {self.layers[k + 1].in_width}"
                )

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.layers[0].in_width, *(layer.out_width for layer in self.layers))

    @property
    def n_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    def copy(self) -> "Autoencoder":
        return Autoencoder(
            [DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers],
            self.arch,
        )

    def parameter_vector(self) -> np.ndarray:
        return np.concatenate([np.concatenate([l.weights.ravel(), l.bias]) for l in self.layers])


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 30
    batch_size: int = 16
    seed: int = 0
    precision: str = "float32"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if self.precision not in PRECISIONS:
            raise ConfigError(f"precision must be one of {PRECISIONS}, got {self.precision!r}")


def default_activations(n_layers: int) -> list[str]:
    return [RELU] * (n_layers - 1) + [SIGMOID]


def init_autoencoder(arch: ArchSpec, seed: int = 0) -> Autoencoder:
    """He-uniform weights, U(-sqrt(6/fan_in), sqrt(6/fan_in)), and zero biases."""
    rng = np.random.default_rng(seed)
    widths = arch.widths
    acts = default_activations(arch.n_layers)
    layers = []
    for k in range(arch.n_layers):
        fan_in, fan_out = widths[k], widths[k + 1]
        bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        layers.append(DenseLayer(w, b, acts[k]))
    return Autoencoder(layers, arch)


def _activate(z, activation):
    if activation == RELU:
        return np.maximum(z, 0.0)
    if activation == SIGMOID:
        # split by sign to avoid overflow in exp
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _check_batch(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.layers[0].in_width:
        raise DimensionError(
            f"batch of shape {x.shape} does not match input width {model.layers[0].in_width}"
        )
    return x


def forward(model: Autoencoder, batch) -> np.ndarray:
    """Reconstruct a batch of flattened images. Pure; never mutates ``model``."""
    h = _check_batch(model, batch)
    for layer in model.layers:
        h = _activate(h @ layer.weights.T + layer.bias, layer.activation)
    return h


def _forward_cached(model, x):
    acts = [x]
    h = x
    for layer in model.layers:
        h = _activate(h @ layer.weights.T + layer.bias, layer.activation)
        acts.append(h)
    return acts


def mse_loss_and_grads(model: Autoencoder, x: np.ndarray, scale: float = 1.0):
    """Mean-squared reconstruction error on ``x`` and its parameter gradients.

    The gradients are of ``scale * mse``; returns ``(mse, [(dW, db), ...])``.
    """
    return _backprop(model, _check_batch(model, x), scale)


def _backprop(model, x, scale):
    acts = _forward_cached(model, x)
    y = acts[-1]
    diff = y - x
    loss = float(np.mean(diff * diff))
    delta = (2.0 * scale / diff.size) * diff
    delta = delta.astype(x.dtype, copy=False)
    grads = [None] * len(model.layers)
    for k in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[k]
        out = acts[k + 1]
        if layer.activation == SIGMOID:
            delta = delta * out * (1.0 - out)
        elif layer.activation == RELU:
            delta = delta * (out > 0)
        grads[k] = (delta.T @ acts[k], delta.sum(axis=0))
        if k > 0:
            delta = delta @ layer.weights
    return loss, grads


@dataclass
class TrainResult:
    model: Autoencoder
    loss_history: list[float] = field(default_factory=list)


def train(model: Autoencoder, images, cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Plain minibatch SGD on the summed squared error of each batch.

    ``loss_history`` holds the per-epoch mean MSE. The input model is not
    modified. Arithmetic runs in ``cfg.precision``; the returned parameters
    are float64 either way.
    """
    dtype = np.dtype(cfg.precision)
    x = np.asarray(images, dtype=dtype)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DimensionError("training data must be a non-empty 2-D array")
    if cfg.epochs == 0:
        return TrainResult(model.copy(), [])
    work = replace_layers(model, [DenseLayer(l.weights.astype(dtype), l.bias.astype(dtype), l.activation)
                                  for l in model.layers])
    _check_batch(work, x[:1])
    lr = dtype.type(cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    history = []
    n = x.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = x[order[start:start + cfg.batch_size]]
            loss, grads = _backprop(work, batch, float(batch.size))
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss in epoch {epoch + 1}", epoch=epoch + 1)
            for layer, (dw, db) in zip(work.layers, grads):
                layer.weights -= lr * dw
                layer.bias -= lr * db
            total += loss * batch.shape[0]
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise DivergenceError(f"non-finite loss in epoch {epoch + 1}", epoch=epoch + 1)
        history.append(epoch_loss)
    out = replace_layers(model, [DenseLayer(l.weights.astype(np.float64), l.bias.astype(np.float64), l.activation)
                                 for l in work.layers])
    return TrainResult(out, history)


def mse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def replace_layers(model: Autoencoder, layers) -> Autoencoder:
    return dataclasses.replace(model, layers=list(layers))

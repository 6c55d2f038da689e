"""Fully-connected autoencoder trained from scratch.

Dense layers with ELU activations everywhere (output layer included), mean
squared reconstruction loss, Nadam updates, and deterministic seeded
training.  Data is arranged column-wise: an input batch has shape
``(n_features, n_samples)``.  The network operates on min-max scaled data;
callers that need physical units wrap ``encode``/``decode`` with the
:class:`Scaler` stored alongside the weights.
"""

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import matio
from .errors import TrainingError

MODEL_MAGIC = b"CRAE"


def elu(x):
    """x for positive inputs, exp(x) - 1 otherwise (continuous, C1 at 0)."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def elu_derivative(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths (input through output) and the bottleneck position."""

    layer_sizes: tuple
    latent_index: int

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise ValueError("a bottleneck network needs at least three layers")
        if not 0 < self.latent_index < len(sizes) - 1:
            raise ValueError("latent_index must point at an interior layer")
        if sizes[self.latent_index] >= sizes[0]:
            raise ValueError("latent size must be smaller than the input size")

    @property
    def n_weight_layers(self):
        return len(self.layer_sizes) - 1

    @property
    def latent_dim(self):
        return self.layer_sizes[self.latent_index]


@dataclass(frozen=True)
class Scaler:
    """Global min-max map onto [0, 1]; one scalar pair for all entries."""

    data_min: float
    data_max: float

    def __post_init__(self):
        if not self.data_max > self.data_min:
            raise ValueError("data_max must exceed data_min")

    @classmethod
    def fit(cls, data):
        data = np.asarray(data, dtype=np.float64)
        return cls(data_min=float(data.min()), data_max=float(data.max()))

    def scale(self, x):
        return (np.asarray(x, dtype=np.float64) - self.data_min) / (
            self.data_max - self.data_min
        )

    def unscale(self, x):
        return np.asarray(x, dtype=np.float64) * (self.data_max - self.data_min) + self.data_min


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rng_seed: int = 0


def init_weights(spec, rng):
    """Glorot-uniform weight matrices and zero biases."""
    weights = []
    sizes = spec.layer_sizes
    for l in range(spec.n_weight_layers):
        fan_in, fan_out = sizes[l], sizes[l + 1]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        weights.append((w, b))
    return weights


def _as_batch(x, n_features):
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x.reshape(-1, 1)
    if x.shape[0] != n_features:
        raise ValueError(f"expected {n_features} features, got {x.shape[0]}")
    return x, squeeze


def _run_layers(weights, x):
    activations = [x]
    pre_activations = []
    out = x
    for w, b in weights:
        z = w @ out + b[:, None]
        out = elu(z)
        pre_activations.append(z)
        activations.append(out)
    return activations, pre_activations


def forward(weights, spec, x):
    """Full forward pass; returns the output and the per-layer caches."""
    batch, squeeze = _as_batch(x, spec.layer_sizes[0])
    activations, pre_activations = _run_layers(weights, batch)
    out = activations[-1]
    return (out[:, 0] if squeeze else out), (activations, pre_activations)


def network_output(weights, spec, x):
    return forward(weights, spec, x)[0]


def encode(weights, spec, x):
    """Forward through the layers up to the bottleneck."""
    batch, squeeze = _as_batch(x, spec.layer_sizes[0])
    out = _run_layers(weights[: spec.latent_index], batch)[0][-1]
    return out[:, 0] if squeeze else out


def decode(weights, spec, latent):
    """Forward through the layers after the bottleneck."""
    batch, squeeze = _as_batch(latent, spec.latent_dim)
    out = _run_layers(weights[spec.latent_index :], batch)[0][-1]
    return out[:, 0] if squeeze else out


def backprop_mse(weights, spec, batch):
    """Loss and exact gradients of the mean squared reconstruction error.

    The loss averages over both features and samples.  Gradients come back
    as one (dW, db) pair per layer.
    """
    batch, _ = _as_batch(batch, spec.layer_sizes[0])
    activations, pre_activations = _run_layers(weights, batch)
    out = activations[-1]
    diff = out - batch
    n_out, m = out.shape
    loss = float(np.mean(diff * diff))
    delta = (2.0 / (n_out * m)) * diff * elu_derivative(pre_activations[-1])
    grads = [None] * len(weights)
    for l in range(len(weights) - 1, -1, -1):
        grads[l] = (delta @ activations[l].T, delta.sum(axis=1))
        if l > 0:
            w = weights[l][0]
            delta = (w.T @ delta) * elu_derivative(pre_activations[l - 1])
    return loss, grads


@dataclass
class NadamState:
    """First/second moments per parameter tensor and the step counter."""

    m: list
    v: list
    t: int = 0

    @classmethod
    def zeros_like(cls, weights):
        return cls(
            m=[(np.zeros_like(w), np.zeros_like(b)) for w, b in weights],
            v=[(np.zeros_like(w), np.zeros_like(b)) for w, b in weights],
        )


def nadam_step(weights, grads, state, config):
    """One Nadam update, in place on the weight arrays.

    Bias-corrected first moment combined with a Nesterov look-ahead on the
    current gradient; no schedule.
    """
    state.t += 1
    t = state.t
    b1, b2 = config.beta1, config.beta2
    lr, eps = config.learning_rate, config.eps
    mc = 1.0 - b1**t
    vc = 1.0 - b2**t
    for l, (w, b) in enumerate(weights):
        for slot, (param, grad) in enumerate(zip((w, b), grads[l])):
            if not np.all(np.isfinite(grad)):
                raise TrainingError(f"non-finite gradient in layer {l}")
            m = state.m[l][slot]
            v = state.v[l][slot]
            m *= b1
            m += (1.0 - b1) * grad
            v *= b2
            v += (1.0 - b2) * grad * grad
            m_bar = b1 * (m / mc) + (1.0 - b1) * grad / mc
            param -= lr * m_bar / (np.sqrt(v / vc) + eps)
    return weights


@dataclass
class TrainedAutoencoder:
    spec: NetworkSpec
    weights: list
    scaler: Scaler
    config: TrainConfig
    loss_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def encode(self, x):
        return encode(self.weights, self.spec, x)

    def decode(self, latent):
        return decode(self.weights, self.spec, latent)

    def reconstruct(self, x):
        return network_output(self.weights, self.spec, x)


def train(spec, snapshots, config):
    """Fit the scaler, then run seeded mini-batch Nadam over the snapshots.

    ``snapshots`` holds raw (unscaled) training samples as columns.  Sample
    order is reshuffled every epoch; a final short batch is used as-is.
    Returns a :class:`TrainedAutoencoder`; identical seeds give identical
    weights and loss histories.
    """
    snapshots = np.asarray(snapshots, dtype=np.float64)
    if snapshots.ndim != 2:
        raise ValueError("snapshots must be a 2D matrix with sample columns")
    n_features, m = snapshots.shape
    if n_features != spec.layer_sizes[0]:
        raise ValueError(
            f"network expects {spec.layer_sizes[0]} inputs, snapshots have {n_features}"
        )
    if config.batch_size > m:
        raise ValueError("batch_size cannot exceed the number of samples")

    scaler = Scaler.fit(snapshots)
    data = scaler.scale(snapshots)
    rng = np.random.default_rng(config.rng_seed)
    weights = init_weights(spec, rng)
    state = NadamState.zeros_like(weights)
    history = np.empty(config.epochs)
    for epoch in range(config.epochs):
        perm = rng.permutation(m)
        total = 0.0
        for start in range(0, m, config.batch_size):
            batch = data[:, perm[start : start + config.batch_size]]
            loss, grads = backprop_mse(weights, spec, batch)
            if not np.isfinite(loss):
                raise TrainingError(f"loss diverged at epoch {epoch}")
            nadam_step(weights, grads, state, config)
            total += loss * batch.shape[1]
        history[epoch] = total / m
    return TrainedAutoencoder(
        spec=spec, weights=weights, scaler=scaler, config=config, loss_history=history
    )


# ---------------------------------------------------------------------------
# architectures

def slab_architecture(latent_dim=10, n_input=100):
    """Deep narrow net used for the slab case (14 weight layers)."""
    sizes = (n_input, n_input, 70, 50, 30, 20, 16, latent_dim,
             16, 20, 30, 50, 70, n_input, n_input)
    return NetworkSpec(layer_sizes=sizes, latent_index=7)


def core_architecture(latent_dim=4, n_input=8100):
    """Wide-input net for the 2D core; the first layer contracts hard."""
    sizes = (n_input, 100, 70, 50, 30, 16, 8, latent_dim,
             8, 16, 30, 50, 70, 100, n_input)
    return NetworkSpec(layer_sizes=sizes, latent_index=7)


def coefficient_architecture(latent_dim=4, n_input=100):
    """Net for SVD coefficients (the hybrid reduction's second stage)."""
    sizes = (n_input, 100, 70, 50, 30, 16, 8, latent_dim,
             8, 16, 30, 50, 70, 100, n_input)
    return NetworkSpec(layer_sizes=sizes, latent_index=7)


# ---------------------------------------------------------------------------
# persistence

def save_model(path, model):
    """Single-file model: magic, JSON header, then per-layer weight blocks."""
    header = {
        "layer_sizes": list(model.spec.layer_sizes),
        "latent_index": model.spec.latent_index,
        "scaler": {"data_min": model.scaler.data_min, "data_max": model.scaler.data_max},
        "config": {
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "learning_rate": model.config.learning_rate,
            "beta1": model.config.beta1,
            "beta2": model.config.beta2,
            "eps": model.config.eps,
            "rng_seed": model.config.rng_seed,
        },
    }
    payload = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)
        for w, b in model.weights:
            fh.write(matio.matrix_to_bytes(w))
            fh.write(matio.matrix_to_bytes(b))
        fh.write(matio.matrix_to_bytes(model.loss_history))


def load_model(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file")
    (header_len,) = struct.unpack_from("<I", buf, 4)
    header = json.loads(buf[8 : 8 + header_len].decode())
    spec = NetworkSpec(
        layer_sizes=tuple(header["layer_sizes"]), latent_index=header["latent_index"]
    )
    scaler = Scaler(**header["scaler"])
    config = TrainConfig(**header["config"])
    offset = 8 + header_len
    weights = []
    for _ in range(spec.n_weight_layers):
        w, offset = matio.matrix_from_buffer(buf, offset)
        b, offset = matio.matrix_from_buffer(buf, offset)
        weights.append((np.ascontiguousarray(w), b[:, 0].copy()))
    history, offset = matio.matrix_from_buffer(buf, offset)
    model = TrainedAutoencoder(
        spec=spec, weights=weights, scaler=scaler, config=config,
        loss_history=history[:, 0].copy(),
    )
    return model

"""Dense feed-forward network trained by per-example stochastic gradient descent.

Every layer applies a logistic sigmoid.  Hidden layers carry a trainable
additive bias; the output layer's bias is fixed at zero.  Training minimizes
the squared error L = 0.5 * sum((output - target)^2) one example at a time,
sweeping the whole training set once per epoch.

Model files are a binary container:

    offset  size          field
    0       8             magic b"SEPMLP01"
    8       4             format version, uint32 LE (currently 1)
    12      8             RNG seed used for initialization, uint64 LE
    20      4             number of layer sizes M, uint32 LE
    24      4*M           layer sizes, uint32 LE each
    ...     4             metadata byte length K, uint32 LE
    ...     K             metadata, UTF-8 JSON with sorted keys
    then, for each of the M-1 layers:
            8*out*in      weight matrix, row-major, float64 LE
            8*out         bias vector, float64 LE (all zero for the last layer)
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.linalg.blas import dger
from scipy.special import expit

from specsep.dataset import TrainingPair

MAGIC = b"SEPMLP01"
FORMAT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""


class ModelFormatError(ValueError):
    """Model file is malformed or has an unsupported version."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 500
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


class Mlp:
    """Layer weights and biases; the output layer bias stays pinned at zero."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray], seed: int = 0):
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one bias vector per weight matrix")
        weights = [np.ascontiguousarray(w, dtype=np.float64) for w in weights]
        biases = [np.ascontiguousarray(b, dtype=np.float64) for b in biases]
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.ndim != 1:
                raise ValueError(f"layer {i}: expected 2-D weights and 1-D bias")
            if w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: weight rows {w.shape[0]} != bias size {b.shape[0]}")
            if i > 0 and w.shape[1] != weights[i - 1].shape[0]:
                raise ValueError(
                    f"layer {i}: input size {w.shape[1]} does not chain from "
                    f"previous output {weights[i - 1].shape[0]}"
                )
        if np.any(biases[-1] != 0.0):
            raise ValueError("output layer bias must be zero")
        self.weights = weights
        self.biases = biases
        self.seed = seed

    @classmethod
    def init(cls, geometry: Sequence[int], seed: int = 0) -> "Mlp":
        """Fresh network with weights uniform in +/- 1/sqrt(fan_in), zero biases.

        geometry lists layer sizes input-first, e.g. [2600, 2600, 5200].
        Deterministic for a given seed.
        """
        if len(geometry) < 2:
            raise ValueError("geometry needs at least an input and an output layer")
        if any(size < 1 for size in geometry):
            raise ValueError(f"all layer sizes must be >= 1, got {list(geometry)}")
        rng = np.random.default_rng(seed)
        weights = []
        biases = []
        for fan_in, fan_out in zip(geometry[:-1], geometry[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, seed=seed)

    @property
    def geometry(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def param_count(self) -> int:
        """Trainable parameters: all weights plus hidden biases."""
        n = sum(w.size for w in self.weights)
        n += sum(b.size for b in self.biases[:-1])
        return n

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Activations of the output layer for one input vector."""
        a = np.asarray(x, dtype=np.float64)
        if a.shape != (self.geometry[0],):
            raise ValueError(
                f"input shape {a.shape} does not match input size {self.geometry[0]}"
            )
        for w, b in zip(self.weights, self.biases):
            a = expit(w @ a + b)
        return a

    def forward_batch(self, inputs: np.ndarray, block: int = 8192) -> np.ndarray:
        """Row-wise forward pass over a (n, input_size) matrix."""
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 2 or inputs.shape[1] != self.geometry[0]:
            raise ValueError(
                f"expected (n, {self.geometry[0]}) inputs, got shape {inputs.shape}"
            )
        out = np.empty((inputs.shape[0], self.geometry[-1]))
        for lo in range(0, inputs.shape[0], block):
            a = inputs[lo : lo + block]
            for w, b in zip(self.weights, self.biases):
                a = expit(a @ w.T + b)
            out[lo : lo + a.shape[0]] = a
        return out


def _backprop_example(
    model: Mlp, x: np.ndarray, target: np.ndarray, learning_rate: float
) -> float:
    """One forward/backward pass with an in-place parameter update."""
    activations = [x]
    a = x
    for w, b in zip(model.weights, model.biases):
        a = expit(w @ a + b)
        activations.append(a)

    err = activations[-1] - target
    loss = 0.5 * float(err @ err)

    last = len(model.weights) - 1
    delta = err * activations[-1] * (1.0 - activations[-1])
    for layer in range(last, -1, -1):
        prev = activations[layer]
        if layer > 0:
            back = model.weights[layer].T @ delta
        # Rank-1 update W -= lr * outer(delta, prev), done in one BLAS pass on
        # the transposed (Fortran-order) view.
        dger(-learning_rate, prev, delta, a=model.weights[layer].T, overwrite_a=1)
        if layer != last:
            model.biases[layer] -= learning_rate * delta
        if layer > 0:
            delta = back * prev * (1.0 - prev)
    return loss


def train_sgd(
    model: Mlp,
    data: Sequence[TrainingPair],
    config: TrainConfig,
    callback: Callable[[int, float], None] | None = None,
) -> tuple[Mlp, list[float]]:
    """Train in place with per-example SGD; returns the model and loss trace.

    One epoch is one full sweep over the data, shuffled by the seeded RNG
    when config.shuffle is set.  No dropout, momentum, or regularization is
    applied.  The callback, if given, runs after each epoch as
    callback(epoch, mean_loss) with 1-based epoch numbers.

    Raises:
        ValueError: empty dataset or dimension mismatch.
        TrainingDivergedError: a per-example loss became non-finite.
    """
    if len(data) == 0:
        raise ValueError("training data is empty")
    inputs = np.stack([np.asarray(p.input, dtype=np.float64) for p in data])
    targets = np.stack([np.asarray(p.target, dtype=np.float64) for p in data])
    if inputs.shape[1] != model.geometry[0] or targets.shape[1] != model.geometry[-1]:
        raise ValueError(
            f"data dimensions ({inputs.shape[1]} -> {targets.shape[1]}) do not match "
            f"model geometry {model.geometry}"
        )

    rng = np.random.default_rng(config.seed)
    n = inputs.shape[0]
    losses = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        total = 0.0
        for idx in order:
            loss = _backprop_example(
                model, inputs[idx], targets[idx], config.learning_rate
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, example {int(idx)}"
                )
            total += loss
        mean_loss = total / n
        losses.append(mean_loss)
        if callback is not None:
            callback(epoch, mean_loss)
    return model, losses


def save_model(path: str | Path, model: Mlp, meta: dict | None = None) -> None:
    """Write a model (and optional JSON-serializable metadata) to disk."""
    meta_bytes = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    sizes = model.geometry
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", model.seed % 2**64))
        fh.write(struct.pack("<I", len(sizes)))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        for w, b in zip(model.weights, model.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_model(path: str | Path) -> tuple[Mlp, dict]:
    """Read a model file back; returns (model, metadata).

    Raises:
        ModelFormatError: bad magic, version, or truncated/corrupt layout.
    """
    blob = Path(path).read_bytes()
    view = memoryview(blob)

    def take(n: int) -> memoryview:
        nonlocal view
        if len(view) < n:
            raise ModelFormatError(f"{path}: truncated model file")
        chunk, view = view[:n], view[n:]
        return chunk

    if bytes(take(8)) != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    (version,) = struct.unpack("<I", take(4))
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    (seed,) = struct.unpack("<Q", take(8))
    (n_sizes,) = struct.unpack("<I", take(4))
    if n_sizes < 2 or n_sizes > 64:
        raise ModelFormatError(f"{path}: implausible layer count {n_sizes}")
    sizes = list(struct.unpack(f"<{n_sizes}I", take(4 * n_sizes)))
    (meta_len,) = struct.unpack("<I", take(4))
    try:
        meta = json.loads(bytes(take(meta_len)).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: bad metadata block: {exc}") from exc

    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(take(8 * fan_out * fan_in), dtype="<f8").reshape(
            fan_out, fan_in
        )
        b = np.frombuffer(take(8 * fan_out), dtype="<f8")
        weights.append(w.copy())
        biases.append(b.copy())
    if len(view):
        raise ModelFormatError(f"{path}: {len(view)} trailing bytes")
    if np.any(biases[-1] != 0.0):
        raise ModelFormatError(f"{path}: output layer bias is not zero")
    for w, b in zip(weights, biases):
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ModelFormatError(f"{path}: non-finite parameters")
    return Mlp(weights, biases, seed=seed), meta

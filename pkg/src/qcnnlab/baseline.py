"""Parameter-matched tiny classical CNNs for the quantum-efficiency comparison.

Six reference stacks over the 1-D feature signal: cnn1/cnn2 carry exactly 12
trainable parameters (the 8-qubit QCNN a3-nopool budget), cnn3..cnn6 exactly
39. All use valid stride-1 convolutions, tanh activations, a global mean
pool, an affine map to one logit, and a sigmoid readout. Training mirrors the
quantum loop (mini-batch gradient descent on binary cross-entropy, seeded
shuffles) and emits the same report schema, with gradients from analytic
backpropagation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .data import FeatureRecord, records_to_arrays
from .training import PROB_CLIP, TrainReport, bce_loss

BASELINE_VARIANTS = ("cnn1", "cnn2", "cnn3", "cnn4", "cnn5", "cnn6")


class Conv1D:
    """Valid, stride-1 cross-correlation with bias."""

    def __init__(self, c_in: int, c_out: int, kernel: int):
        self.c_in, self.c_out, self.kernel = c_in, c_out, kernel
        self.w = np.zeros((c_out, c_in, kernel))
        self.b = np.zeros(c_out)

    @property
    def n_params(self) -> int:
        return self.w.size + self.b.size

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        t_out = x.shape[2] - self.kernel + 1
        y = np.tile(self.b[None, :, None], (x.shape[0], 1, t_out))
        for k in range(self.kernel):
            y += np.einsum("oc,bct->bot", self.w[:, :, k], x[:, :, k : k + t_out])
        return y

    def backward(self, g: np.ndarray) -> np.ndarray:
        x = self._x
        t_out = g.shape[2]
        self.gw = np.empty_like(self.w)
        for k in range(self.kernel):
            self.gw[:, :, k] = np.einsum("bot,bct->oc", g, x[:, :, k : k + t_out])
        self.gb = g.sum(axis=(0, 2))
        gx = np.zeros_like(x)
        for k in range(self.kernel):
            gx[:, :, k : k + t_out] += np.einsum("oc,bot->bct", self.w[:, :, k], g)
        return gx


class ChannelScale:
    """Kernel-1 convolution without bias (one scalar per channel)."""

    def __init__(self, channels: int):
        self.w = np.zeros(channels)

    @property
    def n_params(self) -> int:
        return self.w.size

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return self.w[None, :, None] * x

    def backward(self, g: np.ndarray) -> np.ndarray:
        self.gw = np.einsum("bct,bct->c", g, self._x)
        return self.w[None, :, None] * g


class Tanh:
    n_params = 0

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._y = np.tanh(x)
        return self._y

    def backward(self, g: np.ndarray) -> np.ndarray:
        return (1.0 - self._y**2) * g


class GlobalMeanPool:
    n_params = 0

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._t = x.shape[2]
        return x.mean(axis=2)

    def backward(self, g: np.ndarray) -> np.ndarray:
        return np.repeat(g[:, :, None], self._t, axis=2) / self._t


class Affine:
    """channels -> single logit."""

    def __init__(self, c_in: int):
        self.w = np.zeros(c_in)
        self.b = np.zeros(1)

    @property
    def n_params(self) -> int:
        return self.w.size + 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.w + self.b[0]

    def backward(self, g: np.ndarray) -> np.ndarray:
        self.gw = g @ self._x
        self.gb = np.array([g.sum()])
        return np.outer(g, self.w)


_ARCHITECTURES = {
    # (layer list builder, expected parameter count)
    "cnn1": (lambda: [Conv1D(1, 1, 8), Tanh(), ChannelScale(1), GlobalMeanPool(), Affine(1)], 12),
    "cnn2": (lambda: [Conv1D(1, 1, 4), Tanh(), Conv1D(1, 1, 4), GlobalMeanPool(), Affine(1)], 12),
    "cnn3": (lambda: [Conv1D(1, 2, 9), Tanh(), Conv1D(2, 1, 8), GlobalMeanPool(), Affine(1)], 39),
    "cnn4": (lambda: [Conv1D(1, 3, 5), Tanh(), Conv1D(3, 1, 6), GlobalMeanPool(), Affine(1)], 39),
    "cnn5": (
        lambda: [
            Conv1D(1, 1, 18),
            Tanh(),
            Conv1D(1, 1, 8),
            Tanh(),
            Conv1D(1, 1, 8),
            GlobalMeanPool(),
            Affine(1),
        ],
        39,
    ),
    "cnn6": (lambda: [Conv1D(1, 4, 4), Tanh(), Conv1D(4, 1, 4), GlobalMeanPool(), Affine(1)], 39),
}


@dataclass(frozen=True)
class BaselineConfig:
    variant: str
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.variant not in BASELINE_VARIANTS:
            raise ValueError(f"unknown baseline variant {self.variant!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")

    def to_dict(self) -> dict:
        return {
            "model": self.variant,
            "param_count": param_count(self.variant),
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "gradient_mode": "backprop",
        }


class TinyCnn:
    """One of the six fixed stacks; exact parameter count asserted at build."""

    def __init__(self, variant: str):
        if variant not in _ARCHITECTURES:
            raise ValueError(f"unknown baseline variant {variant!r}")
        builder, expected = _ARCHITECTURES[variant]
        self.variant = variant
        self.layers = builder()
        if self.param_count != expected:
            raise AssertionError(
                f"{variant} has {self.param_count} parameters, expected {expected}"
            )

    @property
    def param_count(self) -> int:
        return sum(layer.n_params for layer in self.layers)

    def init_params(self, rng: np.random.Generator) -> None:
        for layer in self.layers:
            if isinstance(layer, Conv1D):
                layer.w = rng.normal(0.0, 1.0 / np.sqrt(layer.c_in * layer.kernel), layer.w.shape)
                layer.b = rng.normal(0.0, 0.1, layer.b.shape)
            elif isinstance(layer, ChannelScale):
                layer.w = rng.normal(0.0, 1.0, layer.w.shape)
            elif isinstance(layer, Affine):
                layer.w = rng.normal(0.0, 1.0 / np.sqrt(layer.w.size), layer.w.shape)
                layer.b = rng.normal(0.0, 0.1, layer.b.shape)

    def get_params(self) -> np.ndarray:
        chunks = []
        for layer in self.layers:
            if isinstance(layer, Conv1D):
                chunks += [layer.w.ravel(), layer.b.ravel()]
            elif isinstance(layer, ChannelScale):
                chunks.append(layer.w.ravel())
            elif isinstance(layer, Affine):
                chunks += [layer.w.ravel(), layer.b.ravel()]
        return np.concatenate(chunks) if chunks else np.zeros(0)

    def set_params(self, flat: np.ndarray) -> None:
        pos = 0

        def take(arr):
            nonlocal pos
            n = arr.size
            out = flat[pos : pos + n].reshape(arr.shape)
            pos += n
            return out.copy()

        for layer in self.layers:
            if isinstance(layer, Conv1D):
                layer.w = take(layer.w)
                layer.b = take(layer.b)
            elif isinstance(layer, ChannelScale):
                layer.w = take(layer.w)
            elif isinstance(layer, Affine):
                layer.w = take(layer.w)
                layer.b = take(layer.b)
        if pos != flat.size:
            raise ValueError(f"expected {pos} parameters, got {flat.size}")

    def logits(self, x: np.ndarray) -> np.ndarray:
        h = x[:, None, :]  # one input channel
        for layer in self.layers:
            h = layer.forward(h)
        return h

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.logits(x)))

    def loss_and_grad(self, x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
        """BCE loss and its gradient w.r.t. the flattened parameters."""
        p = np.clip(self.predict_proba(x), PROB_CLIP, 1.0 - PROB_CLIP)
        loss = bce_loss(p, y)
        g = (p - y) / y.size  # d(BCE)/d(logit) through the sigmoid
        for layer in reversed(self.layers):
            g = layer.backward(g)
        chunks = []
        for layer in self.layers:
            if isinstance(layer, Conv1D):
                chunks += [layer.gw.ravel(), layer.gb.ravel()]
            elif isinstance(layer, ChannelScale):
                chunks.append(layer.gw.ravel())
            elif isinstance(layer, Affine):
                chunks += [layer.gw.ravel(), layer.gb.ravel()]
        return loss, np.concatenate(chunks)


def build_tiny_cnn(variant: str) -> TinyCnn:
    return TinyCnn(variant)


def param_count(variant: str) -> int:
    if variant not in _ARCHITECTURES:
        raise ValueError(f"unknown baseline variant {variant!r}")
    return _ARCHITECTURES[variant][1]


def train_baseline(
    config: BaselineConfig,
    train_set: list[FeatureRecord],
    test_set: list[FeatureRecord],
) -> TrainReport:
    """Same protocol and report schema as the quantum training loop."""
    if not train_set or not test_set:
        raise ValueError("train and test sets must be nonempty")
    started = time.perf_counter()
    x_train, y_train = records_to_arrays(train_set)
    x_test, y_test = records_to_arrays(test_set)
    if np.any((y_train != 0) & (y_train != 1)) or np.any((y_test != 0) & (y_test != 1)):
        raise ValueError("labels must be 0 or 1")
    model = TinyCnn(config.variant)
    rng = np.random.default_rng(config.seed)
    model.init_params(rng)
    params = model.get_params()
    losses: list[float] = []
    n = len(train_set)
    for _ in range(config.epochs):
        model.set_params(params)
        losses.append(bce_loss(np.clip(model.predict_proba(x_train), PROB_CLIP, 1 - PROB_CLIP), y_train))
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            model.set_params(params)
            _, grad = model.loss_and_grad(x_train[idx], y_train[idx])
            params = params - config.learning_rate * grad
    model.set_params(params)
    train_probs = model.predict_proba(x_train)
    test_probs = model.predict_proba(x_test)
    return TrainReport(
        config=config.to_dict(),
        losses=losses,
        final_params=params,
        train_acc=float(np.mean((train_probs >= 0.5).astype(int) == y_train)),
        test_acc=float(np.mean((test_probs >= 0.5).astype(int) == y_test)),
        wall_time_s=time.perf_counter() - started,
    )

"""Desk-scale trainer for dense networks with QCFS activations.

Plain mini-batch gradient descent with manual backpropagation; the
activation's staircase is bypassed with a straight-through estimator whose
gradient is 1 strictly inside (0, lam) and 0 outside. The per-layer output
ceilings are calibrated from data (maximum observed pre-activation) rather
than trained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import QCFSParams, qcfs
from .model import LayerSpec, ModelSpec, copy_model, validate_model

LAMBDA_FLOOR = 1e-3


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one training run. Fully determined by ``seed``."""

    architecture: tuple[int, ...] = (2, 16, 2)
    levels: int = 4
    epochs: int = 60
    learning_rate: float = 0.1
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.architecture) < 2 or any(w < 1 for w in self.architecture):
            raise ValueError(f"architecture needs >= 2 positive widths, got {self.architecture}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def qcfs_ste_grad(z: np.ndarray, params: QCFSParams) -> np.ndarray:
    """Straight-through gradient of the QCFS activation w.r.t. its input."""
    z = np.asarray(z, dtype=np.float64)
    return ((z > 0.0) & (z < params.lam)).astype(np.float64)


def initialize_model(cfg: TrainConfig, rng: np.random.Generator) -> ModelSpec:
    """Seeded dense stack; hidden layers activated, output layer raw affine."""
    layers = []
    widths = cfg.architecture
    for i, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        act = None if i == len(widths) - 2 else QCFSParams(lam=1.0, levels=cfg.levels)
        layers.append(LayerSpec(kind="dense", weights=weights, bias=np.zeros(fan_out), act=act))
    model = ModelSpec(input_shape=(widths[0],), levels=cfg.levels, layers=layers)
    validate_model(model)
    return model


def calibrate_lambda(model: ModelSpec, X_sample: np.ndarray) -> ModelSpec:
    """Set each activated layer's ceiling to its max pre-activation.

    Layers are calibrated front to back, so later layers see activations
    produced under the already-updated earlier ceilings. Ceilings never drop
    below LAMBDA_FLOOR, which also covers all-zero pre-activations.
    """
    validate_model(model)
    X_sample = np.asarray(X_sample, dtype=np.float64)
    if X_sample.ndim != 2 or X_sample.shape[0] == 0:
        raise ValueError("calibration sample must be a non-empty 2-D array")
    out = copy_model(model)
    a = X_sample
    for layer in out.layers:
        z = a @ layer.weights.T + layer.bias
        if layer.act is not None:
            if not np.isfinite(z).all():
                raise ValueError("calibration diverged: non-finite pre-activations")
            lam = max(float(z.max()), LAMBDA_FLOOR)
            layer.act = QCFSParams(lam=lam, levels=layer.act.levels)
            a = qcfs(z, layer.act)
        else:
            a = z
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, y: np.ndarray) -> float:
    p = _softmax(logits)
    return float(-np.log(p[np.arange(len(y)), y] + 1e-300).mean())


def train(dataset: tuple[np.ndarray, np.ndarray], cfg: TrainConfig) -> ModelSpec:
    """Train a QCFS-activated dense network; deterministic given the seed.

    Ceilings are calibrated on the training inputs before the first epoch and
    once more after the last, so the stored model never clips on the data it
    was fit to. Raises if the loss stops being finite.
    """
    X, y = dataset
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("dataset features must be a non-empty 2-D array")
    if X.shape[0] != y.shape[0]:
        raise ValueError("feature and label counts differ")
    if X.shape[1] != cfg.architecture[0]:
        raise ValueError(
            f"dataset has {X.shape[1]} features but architecture expects {cfg.architecture[0]}"
        )
    n_classes = cfg.architecture[-1]
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes}), got [{y.min()}, {y.max()}]")

    rng = np.random.default_rng(cfg.seed)
    model = calibrate_lambda(initialize_model(cfg, rng), X)
    weights = [layer.weights for layer in model.layers]
    biases = [layer.bias for layer in model.layers]
    acts = [layer.act for layer in model.layers]
    n = X.shape[0]
    history = []

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = X[idx], y[idx]

            zs, activations = [], [xb]
            for w, b, act in zip(weights, biases, acts):
                z = activations[-1] @ w.T + b
                zs.append(z)
                activations.append(qcfs(z, act) if act is not None else z)

            logits = activations[-1]
            loss = cross_entropy(logits, yb)
            if not np.isfinite(loss):
                raise ValueError(f"training diverged: non-finite loss at epoch {epoch}")
            epoch_loss += loss * len(idx)

            grad = _softmax(logits)
            grad[np.arange(len(yb)), yb] -= 1.0
            grad /= len(yb)
            for l in range(len(weights) - 1, -1, -1):
                dW = grad.T @ activations[l]
                db = grad.sum(axis=0)
                if l > 0:
                    grad = (grad @ weights[l]) * qcfs_ste_grad(zs[l - 1], acts[l - 1])
                weights[l] -= cfg.learning_rate * dW
                biases[l] -= cfg.learning_rate * db
        history.append(epoch_loss / n)

    model = calibrate_lambda(model, X)
    model.metadata = {
        "source": "train",
        "seed": cfg.seed,
        "architecture": list(cfg.architecture),
        "epochs": cfg.epochs,
        "learning_rate": cfg.learning_rate,
        "batch_size": cfg.batch_size,
        "final_loss": history[-1] if history else None,
        "loss_history": history,
    }
    return model

"""Scikit-learn style estimators over the training/conversion/simulation core.

``QCFSNetClassifier`` fits a dense network with quantized activations;
``SpikingNetClassifier`` fits the same network and predicts by running it as
a group-neuron spiking network for a fixed number of time-steps. Both are
clone-compatible (parameters live in ``__init__``, learned state in
``*_``-suffixed attributes) and compose with sklearn pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .convert import convert
from .model import ModelSpec
from .network import SimConfig, ann_forward_batch, snn_forward_batch
from .train import TrainConfig, train


def _check_features(X, n_features: int) -> np.ndarray:
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, expected {n_features}")
    return X


class QCFSNetClassifier(BaseEstimator, ClassifierMixin):
    """Dense classifier with quantized clip-floor-shift activations.

    Parameters mirror the trainer: ``hidden_layers`` are the hidden widths,
    ``levels`` the activation's quantization level. Fitting is deterministic
    given ``seed``.
    """

    def __init__(
        self,
        hidden_layers=(16,),
        levels: int = 4,
        epochs: int = 60,
        learning_rate: float = 0.1,
        batch_size: int = 32,
        seed: int = 0,
    ):
        self.hidden_layers = hidden_layers
        self.levels = levels
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed

    def _train_config(self, n_features: int, n_classes: int) -> TrainConfig:
        return TrainConfig(
            architecture=(n_features, *tuple(self.hidden_layers), n_classes),
            levels=self.levels,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=self.seed,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes")
        self.n_features_in_ = X.shape[1]
        self.model_ = train((X, y_idx), self._train_config(X.shape[1], len(self.classes_)))
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return ann_forward_batch(self.model_, _check_features(X, self.n_features_in_))

    def predict(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        return self.classes_[logits.argmax(axis=1)]

    def to_spiking(self, tau: int = 4, T: int = 8, v0_policy: str = "half_threshold"):
        """Convert the fitted network into a ready-to-predict spiking twin."""
        check_is_fitted(self, "model_")
        return SpikingNetClassifier.from_model(
            convert(self.model_, tau), T=T, v0_policy=v0_policy, classes=self.classes_
        )


class SpikingNetClassifier(BaseEstimator, ClassifierMixin):
    """Classifier that predicts with time-stepped group-neuron dynamics.

    ``fit`` trains the quantized-activation source network and converts it;
    ``predict`` runs ``T`` simulation steps per sample and rate-decodes the
    output layer. ``tau=1`` reproduces plain integrate-and-fire behavior.
    """

    def __init__(
        self,
        hidden_layers=(16,),
        levels: int = 4,
        epochs: int = 60,
        learning_rate: float = 0.1,
        batch_size: int = 32,
        seed: int = 0,
        tau: int = 4,
        T: int = 8,
        v0_policy: str = "half_threshold",
    ):
        self.hidden_layers = hidden_layers
        self.levels = levels
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.tau = tau
        self.T = T
        self.v0_policy = v0_policy

    @classmethod
    def from_model(
        cls,
        model: ModelSpec,
        T: int = 8,
        v0_policy: str = "half_threshold",
        classes=None,
    ) -> "SpikingNetClassifier":
        """Wrap an already converted model without retraining."""
        if len(model.input_shape) != 1:
            raise ValueError("estimator API supports flat feature vectors only")
        if any(layer.act is not None and layer.theta is None for layer in model.layers):
            raise ValueError("model is not converted; run conversion first")
        sim = SimConfig.from_model(model, T=T, v0_policy=v0_policy)
        if sim.neuron == "gn" and sim.tau is None:
            raise ValueError("model has no member-count tag; convert it with a tau first")
        est = cls(T=T, tau=sim.tau if sim.tau is not None else 1, v0_policy=v0_policy)
        est.model_ = model
        est.n_features_in_ = model.input_shape[0]
        n_out = model.layers[-1].weights.shape[0]
        est.classes_ = np.arange(n_out) if classes is None else np.asarray(classes)
        return est

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes")
        self.n_features_in_ = X.shape[1]
        cfg = TrainConfig(
            architecture=(X.shape[1], *tuple(self.hidden_layers), len(self.classes_)),
            levels=self.levels,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=self.seed,
        )
        self.ann_model_ = train((X, y_idx), cfg)
        self.model_ = convert(self.ann_model_, self.tau)
        return self

    def _sim(self) -> SimConfig:
        return SimConfig.from_model(self.model_, T=self.T, v0_policy=self.v0_policy)

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = _check_features(X, self.n_features_in_)
        return snn_forward_batch(self.model_, X, self._sim())

    def predict(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        return self.classes_[logits.argmax(axis=1)]

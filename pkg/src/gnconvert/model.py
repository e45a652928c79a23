"""Weight-graph model representation, validation, and JSON persistence.

A model is an ordered chain of layers over a fixed input shape. Layers that
carry a QCFS activation are the ones a conversion turns into spiking layers;
the final layer never has an activation and emits raw affine outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .activations import QCFSParams

MODEL_FORMAT_VERSION = 1

LAYER_KINDS = ("dense", "conv2d", "avgpool2d", "flatten")


@dataclass
class LayerSpec:
    """One layer of the weight graph.

    weights: (out, in) for dense, (out_c, in_c, kh, kw) for conv2d, None for
    the shape-only kinds. ``pool`` is the avgpool2d kernel; pooling windows
    do not overlap (stride equals kernel). ``theta`` appears once the model
    has been converted for spiking execution, ``tau`` once its IF neurons
    have been replaced by group neurons.
    """

    kind: str
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    act: QCFSParams | None = None
    pool: tuple[int, int] | None = None
    theta: float | None = None
    tau: int | None = None

    @property
    def spiking(self) -> bool:
        return self.theta is not None


@dataclass
class ModelSpec:
    """An ordered layer chain plus the shared quantization level.

    Immutable by convention: transformations return new instances.
    ``metadata`` records provenance (seed, training setup) and never affects
    execution.
    """

    input_shape: tuple[int, ...]
    levels: int
    layers: list[LayerSpec]
    metadata: dict = field(default_factory=dict)

    def validate(self) -> "ModelSpec":
        validate_model(self)
        return self


class ModelValidationError(ValueError):
    """Raised when a model violates the chain contract."""


def _layer_output_shape(layer: LayerSpec, in_shape: tuple[int, ...], name: str) -> tuple[int, ...]:
    kind = layer.kind
    if kind == "dense":
        if layer.weights is None or layer.weights.ndim != 2:
            raise ModelValidationError(f"{name}: dense layer needs a 2-D weight matrix")
        out_n, in_n = layer.weights.shape
        if in_shape != (in_n,):
            raise ModelValidationError(
                f"{name}: dense expects input shape ({in_n},), got {in_shape}"
            )
        if layer.bias is not None and layer.bias.shape != (out_n,):
            raise ModelValidationError(f"{name}: bias shape {layer.bias.shape} != ({out_n},)")
        return (out_n,)
    if kind == "conv2d":
        if layer.weights is None or layer.weights.ndim != 4:
            raise ModelValidationError(f"{name}: conv2d layer needs a 4-D weight tensor")
        out_c, in_c, kh, kw = layer.weights.shape
        if len(in_shape) != 3 or in_shape[0] != in_c:
            raise ModelValidationError(
                f"{name}: conv2d expects input shape ({in_c}, H, W), got {in_shape}"
            )
        _, h, w = in_shape
        if kh > h or kw > w:
            raise ModelValidationError(f"{name}: kernel {(kh, kw)} larger than input {(h, w)}")
        if layer.bias is not None and layer.bias.shape != (out_c,):
            raise ModelValidationError(f"{name}: bias shape {layer.bias.shape} != ({out_c},)")
        return (out_c, h - kh + 1, w - kw + 1)
    if kind == "avgpool2d":
        if layer.pool is None:
            raise ModelValidationError(f"{name}: avgpool2d layer needs a pool kernel")
        ph, pw = layer.pool
        if len(in_shape) != 3:
            raise ModelValidationError(f"{name}: avgpool2d expects (C, H, W), got {in_shape}")
        c, h, w = in_shape
        if ph < 1 or pw < 1 or h % ph or w % pw:
            raise ModelValidationError(
                f"{name}: pool {(ph, pw)} must evenly divide input {(h, w)}"
            )
        return (c, h // ph, w // pw)
    if kind == "flatten":
        return (int(np.prod(in_shape)),)
    raise ModelValidationError(f"{name}: unknown layer kind {kind!r}")


def validate_model(model: ModelSpec) -> None:
    """Check the full chain contract, naming the offending layer on failure."""
    if not model.layers:
        raise ModelValidationError("model must have at least one layer")
    if model.levels < 1:
        raise ModelValidationError(f"levels must be >= 1, got {model.levels}")
    shape = tuple(model.input_shape)
    for i, layer in enumerate(model.layers):
        name = f"layer {i} ({layer.kind})"
        shape = _layer_output_shape(layer, shape, name)
        if layer.act is not None:
            if layer.kind not in ("dense", "conv2d"):
                raise ModelValidationError(f"{name}: only weighted layers may carry an activation")
            if layer.act.levels != model.levels:
                raise ModelValidationError(
                    f"{name}: activation levels {layer.act.levels} != model levels {model.levels}"
                )
        if layer.theta is not None:
            if layer.act is None:
                raise ModelValidationError(f"{name}: threshold on a non-activated layer")
            if not layer.theta > 0:
                raise ModelValidationError(f"{name}: theta must be positive, got {layer.theta}")
        if layer.tau is not None:
            if layer.theta is None:
                raise ModelValidationError(f"{name}: tau without a spiking threshold")
            if layer.tau < 1:
                raise ModelValidationError(f"{name}: tau must be >= 1, got {layer.tau}")
    if model.layers[-1].act is not None:
        raise ModelValidationError("final layer must not have an activation")


def output_shape(model: ModelSpec) -> tuple[int, ...]:
    shape = tuple(model.input_shape)
    for i, layer in enumerate(model.layers):
        shape = _layer_output_shape(layer, shape, f"layer {i} ({layer.kind})")
    return shape


def copy_model(model: ModelSpec) -> ModelSpec:
    """Deep copy; array payloads are duplicated so callers can tag freely."""
    layers = [
        replace(
            layer,
            weights=None if layer.weights is None else layer.weights.copy(),
            bias=None if layer.bias is None else layer.bias.copy(),
        )
        for layer in model.layers
    ]
    return ModelSpec(
        input_shape=tuple(model.input_shape),
        levels=model.levels,
        layers=layers,
        metadata=dict(model.metadata),
    )


# --- layer application -------------------------------------------------------
#
# All ops take a batch-first array (n, *in_shape) and return (n, *out_shape).
# conv2d and avgpool2d are direct position loops; desk-scale inputs keep them
# cheap and the fixed reduction order keeps runs reproducible.


def apply_layer_linear(layer: LayerSpec, a: np.ndarray) -> np.ndarray:
    """Apply the layer's linear/affine map to a batch, without activation."""
    if layer.kind == "dense":
        z = a @ layer.weights.T
        if layer.bias is not None:
            z = z + layer.bias
        return z
    if layer.kind == "conv2d":
        return _conv2d_direct(a, layer.weights, layer.bias)
    if layer.kind == "avgpool2d":
        return _avgpool2d_direct(a, layer.pool)
    if layer.kind == "flatten":
        return a.reshape(a.shape[0], -1)
    raise ModelValidationError(f"unknown layer kind {layer.kind!r}")


def _conv2d_direct(a: np.ndarray, w: np.ndarray, bias: np.ndarray | None) -> np.ndarray:
    n = a.shape[0]
    out_c, in_c, kh, kw = w.shape
    h_out = a.shape[2] - kh + 1
    w_out = a.shape[3] - kw + 1
    out = np.zeros((n, out_c, h_out, w_out), dtype=np.float64)
    for i in range(h_out):
        for j in range(w_out):
            patch = a[:, :, i : i + kh, j : j + kw]
            for o in range(out_c):
                out[:, o, i, j] = (patch * w[o]).sum(axis=(1, 2, 3))
    if bias is not None:
        out += bias[None, :, None, None]
    return out


def _avgpool2d_direct(a: np.ndarray, pool: tuple[int, int]) -> np.ndarray:
    ph, pw = pool
    n, c, h, w = a.shape
    out = np.zeros((n, c, h // ph, w // pw), dtype=np.float64)
    for i in range(h // ph):
        for j in range(w // pw):
            out[:, :, i, j] = a[:, :, i * ph : (i + 1) * ph, j * pw : (j + 1) * pw].mean(
                axis=(2, 3)
            )
    return out


# --- JSON persistence --------------------------------------------------------


def _layer_to_doc(layer: LayerSpec) -> dict:
    if layer.kind in ("dense", "conv2d"):
        shape = list(layer.weights.shape)
        weights = layer.weights.reshape(-1).tolist()
        bias = None if layer.bias is None else layer.bias.tolist()
    elif layer.kind == "avgpool2d":
        shape = list(layer.pool)
        weights = None
        bias = None
    else:
        shape = []
        weights = None
        bias = None
    doc = {
        "kind": layer.kind,
        "shape": shape,
        "weights": weights,
        "bias": bias,
        "lambda": None if layer.act is None else layer.act.lam,
    }
    if layer.theta is not None:
        doc["theta"] = layer.theta
    if layer.tau is not None:
        doc["tau"] = layer.tau
    return doc


def _layer_from_doc(doc: dict, levels: int, name: str) -> LayerSpec:
    kind = doc.get("kind")
    if kind not in LAYER_KINDS:
        raise ModelValidationError(f"{name}: unknown layer kind {kind!r}")
    shape = tuple(doc.get("shape") or ())
    weights = bias = None
    pool = None
    if kind in ("dense", "conv2d"):
        flat = doc.get("weights")
        if flat is None:
            raise ModelValidationError(f"{name}: {kind} layer is missing weights")
        try:
            weights = np.asarray(flat, dtype=np.float64).reshape(shape)
        except ValueError as exc:
            raise ModelValidationError(f"{name}: weights do not match shape {shape}") from exc
        if doc.get("bias") is not None:
            bias = np.asarray(doc["bias"], dtype=np.float64)
    elif kind == "avgpool2d":
        if len(shape) != 2:
            raise ModelValidationError(f"{name}: avgpool2d shape must be [kh, kw]")
        pool = (int(shape[0]), int(shape[1]))
    lam = doc.get("lambda")
    act = None if lam is None else QCFSParams(lam=float(lam), levels=levels)
    theta = doc.get("theta")
    tau = doc.get("tau")
    return LayerSpec(
        kind=kind,
        weights=weights,
        bias=bias,
        act=act,
        pool=pool,
        theta=None if theta is None else float(theta),
        tau=None if tau is None else int(tau),
    )


def model_to_json(model: ModelSpec) -> str:
    """Serialize to the interchange document. Deterministic byte-for-byte."""
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "input_shape": list(model.input_shape),
        "L": model.levels,
        "metadata": model.metadata,
        "layers": [_layer_to_doc(layer) for layer in model.layers],
    }
    return json.dumps(doc, indent=2) + "\n"


def model_from_json(text: str) -> ModelSpec:
    doc = json.loads(text)
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelValidationError(f"unsupported model format version {version!r}")
    levels = int(doc["L"])
    layers = [
        _layer_from_doc(layer_doc, levels, f"layer {i}")
        for i, layer_doc in enumerate(doc.get("layers", []))
    ]
    model = ModelSpec(
        input_shape=tuple(int(d) for d in doc["input_shape"]),
        levels=levels,
        layers=layers,
        metadata=doc.get("metadata", {}),
    )
    validate_model(model)
    return model


def save_model(model: ModelSpec, path) -> None:
    validate_model(model)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))


def load_model(path) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())


def model_hash(model: ModelSpec) -> str:
    """Stable content hash of the serialized model (first 10 hex digits)."""
    return hashlib.sha256(model_to_json(model).encode("utf-8")).hexdigest()[:10]

"""Two execution semantics for one weight graph.

``ann_forward`` runs the graph as a quantized-activation network.
``snn_forward`` runs it as a time-stepped spiking network: the raw input is
presented as a constant current at every step (direct coding), hidden
spiking layers exchange postsynaptic potentials, and the final affine layer
accumulates its pre-activation over the run instead of spiking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import qcfs
from .model import LayerSpec, ModelSpec, apply_layer_linear, validate_model

V0_POLICIES = ("zero", "half_threshold")
ENCODINGS = ("direct_constant",)
DECODINGS = ("accumulate_output",)
NEURON_KINDS = ("if", "gn")


@dataclass(frozen=True)
class SimConfig:
    """How to run a converted model as a spiking network.

    ``tau`` overrides the member count stored on the model's layers; leave it
    None to use the stored tags. ``v0_policy`` sets the shared initial
    membrane potential: half of the per-spike reset amount, or zero.
    """

    T: int
    neuron: str = "gn"
    tau: int | None = None
    v0_policy: str = "half_threshold"
    encoding: str = "direct_constant"
    decoding: str = "accumulate_output"

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.neuron not in NEURON_KINDS:
            raise ValueError(f"neuron must be one of {NEURON_KINDS}, got {self.neuron!r}")
        if self.tau is not None and self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.v0_policy not in V0_POLICIES:
            raise ValueError(f"v0_policy must be one of {V0_POLICIES}, got {self.v0_policy!r}")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unsupported input encoding {self.encoding!r}")
        if self.decoding not in DECODINGS:
            raise ValueError(f"unsupported output decoding {self.decoding!r}")

    @classmethod
    def from_model(cls, model: ModelSpec, T: int, **overrides) -> "SimConfig":
        """Derive neuron kind and member count from the model's conversion tags."""
        taus = {layer.tau for layer in model.layers if layer.tau is not None}
        if len(taus) > 1:
            raise ValueError(f"model carries conflicting tau tags {sorted(taus)}")
        if taus:
            defaults = {"neuron": "gn", "tau": taus.pop()}
        else:
            defaults = {"neuron": "if", "tau": None}
        defaults.update(overrides)
        return cls(T=T, **defaults)


@dataclass
class Trace:
    """Per-step record of one spiking run.

    ``layer_counts[l]`` holds the (T, *layer_shape) integer spike counts of
    spiking layer l; ``spike_units[l]`` its per-spike postsynaptic weight.
    ``output_steps`` is the final layer's affine output at each step.
    """

    T: int
    layer_counts: dict[int, np.ndarray] = field(default_factory=dict)
    v_start: dict[int, np.ndarray] = field(default_factory=dict)
    v_end: dict[int, np.ndarray] = field(default_factory=dict)
    spike_units: dict[int, float] = field(default_factory=dict)
    output_steps: np.ndarray | None = None

    @property
    def spiking_layers(self) -> list[int]:
        return sorted(self.layer_counts)


def phi(trace: Trace, layer: int, per_spike_weight: float, T: int) -> np.ndarray:
    """Average postsynaptic potential of a layer over a T-step run."""
    counts = trace.layer_counts[layer]
    return counts[:T].sum(axis=0) * per_spike_weight / T


def ann_forward(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """Quantized-activation forward pass for a single input; returns logits."""
    return ann_forward_batch(model, np.asarray(x, dtype=np.float64)[None])[0]


def ann_forward_batch(model: ModelSpec, X: np.ndarray) -> np.ndarray:
    """Vectorized :func:`ann_forward` over a leading batch axis."""
    validate_model(model)
    a = np.asarray(X, dtype=np.float64)
    if a.shape[1:] != tuple(model.input_shape):
        raise ValueError(
            f"input shape {a.shape[1:]} does not match model input {tuple(model.input_shape)}"
        )
    for layer in model.layers:
        z = apply_layer_linear(layer, a)
        a = qcfs(z, layer.act) if layer.act is not None else z
    return a


def _spiking_params(layer: LayerSpec, sim: SimConfig, name: str) -> tuple[np.ndarray, float]:
    """Member-threshold row and per-spike weight for one spiking layer."""
    if layer.theta is None:
        raise ValueError(f"{name}: model is not converted (no threshold); run conversion first")
    theta = layer.theta
    if sim.neuron == "if":
        return np.array([theta]), theta
    tau = sim.tau if sim.tau is not None else layer.tau
    if tau is None:
        raise ValueError(
            f"{name}: group-neuron run needs tau, but neither the simulation "
            "config nor the model provides one"
        )
    thresholds = np.array([i * theta / tau for i in range(1, tau + 1)])
    return thresholds, theta / tau


def snn_forward(model: ModelSpec, x: np.ndarray, sim: SimConfig) -> tuple[np.ndarray, Trace]:
    """Time-stepped spiking forward pass for a single input.

    Returns the rate-decoded logits (accumulated final-layer pre-activation
    divided by T) and the full Trace of the run.
    """
    validate_model(model)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != tuple(model.input_shape):
        raise ValueError(
            f"input shape {x.shape} does not match model input {tuple(model.input_shape)}"
        )
    X = x[None]

    thresholds: dict[int, np.ndarray] = {}
    units: dict[int, float] = {}
    v: dict[int, np.ndarray] = {}
    trace = Trace(T=sim.T)
    for i, layer in enumerate(model.layers):
        if layer.act is not None:
            thr, unit = _spiking_params(layer, sim, f"layer {i} ({layer.kind})")
            thresholds[i] = thr
            units[i] = unit

    counts_log: dict[int, list[np.ndarray]] = {i: [] for i in thresholds}
    out_steps: list[np.ndarray] = []
    accumulated = None

    for t in range(sim.T):
        cur = X
        for i, layer in enumerate(model.layers):
            z = apply_layer_linear(layer, cur)
            if i in thresholds:
                if t == 0:
                    v0 = units[i] / 2 if sim.v0_policy == "half_threshold" else 0.0
                    v[i] = np.full(z.shape, v0)
                    trace.v_start[i] = v[i][0].copy()
                p = v[i] + z
                counts = (p[..., None] >= thresholds[i]).sum(axis=-1)
                psp = counts * units[i]
                v[i] = p - psp
                counts_log[i].append(counts[0])
                cur = psp
            else:
                cur = z
        out_steps.append(cur[0])
        accumulated = cur if accumulated is None else accumulated + cur

    for i in thresholds:
        trace.layer_counts[i] = np.stack(counts_log[i])
        trace.v_end[i] = v[i][0].copy()
        trace.spike_units[i] = units[i]
    trace.output_steps = np.stack(out_steps)
    return (accumulated / sim.T)[0], trace


def snn_forward_batch(model: ModelSpec, X: np.ndarray, sim: SimConfig) -> np.ndarray:
    """Vectorized spiking forward pass over a batch; returns logits only."""
    validate_model(model)
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1:] != tuple(model.input_shape):
        raise ValueError(
            f"input shape {X.shape[1:]} does not match model input {tuple(model.input_shape)}"
        )
    thresholds: dict[int, np.ndarray] = {}
    units: dict[int, float] = {}
    v: dict[int, np.ndarray] = {}
    for i, layer in enumerate(model.layers):
        if layer.act is not None:
            thr, unit = _spiking_params(layer, sim, f"layer {i} ({layer.kind})")
            thresholds[i] = thr
            units[i] = unit

    accumulated = None
    for t in range(sim.T):
        cur = X
        for i, layer in enumerate(model.layers):
            z = apply_layer_linear(layer, cur)
            if i in thresholds:
                if t == 0:
                    v0 = units[i] / 2 if sim.v0_policy == "half_threshold" else 0.0
                    v[i] = np.full(z.shape, v0)
                p = v[i] + z
                counts = (p[..., None] >= thresholds[i]).sum(axis=-1)
                psp = counts * units[i]
                v[i] = p - psp
                cur = psp
            else:
                cur = z
        accumulated = cur if accumulated is None else accumulated + cur
    return accumulated / sim.T

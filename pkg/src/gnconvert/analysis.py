"""Verification instruments: firing-rate staircases, conversion-error
reports, accuracy evaluation, and rate-identity audits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelSpec, apply_layer_linear, validate_model
from .network import SimConfig, ann_forward_batch, phi, snn_forward, snn_forward_batch

METRICS = ("accuracy", "mse", "phi_residual_max")


@dataclass(frozen=True)
class ReportRow:
    T: int
    neuron: str
    metric: str
    value: float
    tau: int | None = None

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"metric {self.metric} is not finite: {self.value}")
        if self.metric == "accuracy" and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"accuracy out of [0, 1]: {self.value}")
        if self.metric == "mse" and self.value < 0.0:
            raise ValueError(f"mse must be >= 0: {self.value}")


@dataclass
class EvalReport:
    """Ordered metric rows from one evaluation run."""

    rows: list[ReportRow] = field(default_factory=list)

    def add(self, **kwargs) -> None:
        self.rows.append(ReportRow(**kwargs))

    def to_csv(self) -> str:
        lines = ["T,tau,neuron,metric,value"]
        for r in self.rows:
            tau = "" if r.tau is None else str(r.tau)
            lines.append(f"{r.T},{tau},{r.neuron},{r.metric},{r.value!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "rows": [
                {"T": r.T, "tau": r.tau, "neuron": r.neuron, "metric": r.metric, "value": r.value}
                for r in self.rows
            ]
        }
        return json.dumps(doc, indent=2) + "\n"


def report_filename(model_digest: str, neuron: str, tau: int | None, T_list, metric: str, ext: str) -> str:
    """Default report name embedding model hash, neuron kind, tau, and T."""
    kind = neuron if tau is None else f"{neuron}{tau}"
    ts = "-".join(str(t) for t in T_list)
    return f"{metric}_{model_digest}_{kind}_T{ts}.{ext}"


def _neuron_params(neuron_kind: str, theta: float, tau: int | None) -> tuple[np.ndarray, float]:
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if neuron_kind == "if":
        return np.array([theta]), theta
    if neuron_kind == "gn":
        if tau is None or tau < 1:
            raise ValueError(f"gn curve needs tau >= 1, got {tau}")
        return np.array([i * theta / tau for i in range(1, tau + 1)]), theta / tau
    raise ValueError(f"neuron_kind must be 'if' or 'gn', got {neuron_kind!r}")


def firing_rate_curve(
    neuron_kind: str,
    theta: float,
    tau: int | None,
    T: int,
    v0_policy: str,
    x_grid: np.ndarray,
) -> np.ndarray:
    """Average postsynaptic potential as a function of constant input.

    Simulates the neuron step by step on every grid point and returns an
    (n, 2) array of (x, rate) rows. The result is a staircase: piecewise
    constant, non-decreasing, 0 below threshold reach and theta at the top.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if v0_policy not in ("zero", "half_threshold"):
        raise ValueError(f"unknown v0 policy {v0_policy!r}")
    x = np.asarray(x_grid, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x_grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError("x_grid must be finite")
    if np.any(np.diff(x) < 0):
        raise ValueError("x_grid must be sorted ascending")
    thresholds, unit = _neuron_params(neuron_kind, theta, tau)
    v = np.full(x.shape, unit / 2 if v0_policy == "half_threshold" else 0.0)
    total = np.zeros(x.shape, dtype=np.int64)
    for _ in range(T):
        p = v + x
        counts = (p[:, None] >= thresholds).sum(axis=1)
        v = p - counts * unit
        total += counts
    return np.column_stack([x, total * unit / T])


def curve_grid(
    theta: float,
    tau: int,
    T: int,
    lo: float = -0.5,
    hi: float = 1.5,
    points: int = 2048,
) -> np.ndarray:
    """Uniform grid over [lo*theta, hi*theta] plus the k*theta/(tau*T)
    staircase breakpoints, so risers land on sampled inputs."""
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    base = np.linspace(lo * theta, hi * theta, points)
    k_lo = math.ceil(lo * tau * T)
    k_hi = math.floor(hi * tau * T)
    breaks = np.array([k * theta / (tau * T) for k in range(k_lo, k_hi + 1)])
    return np.unique(np.concatenate([base, breaks]))


def riser_positions(curve: np.ndarray) -> np.ndarray:
    """x positions where the staircase steps up (first sample at the new level)."""
    x, rate = curve[:, 0], curve[:, 1]
    up = np.nonzero(np.diff(rate) > 0)[0]
    return x[up + 1]


def accuracy_eval(
    model: ModelSpec,
    dataset: tuple[np.ndarray, np.ndarray],
    sim: SimConfig | None = None,
) -> float:
    """Fraction of argmax-correct predictions; ``sim=None`` runs the ANN path.

    Ties resolve to the lowest class index.
    """
    X, y = dataset
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("dataset must be non-empty")
    logits = ann_forward_batch(model, X) if sim is None else snn_forward_batch(model, X, sim)
    return float((logits.argmax(axis=1) == y).mean())


def conversion_mse(
    ann: ModelSpec,
    snn: ModelSpec,
    dataset: tuple[np.ndarray, np.ndarray],
    T_list,
    v0_policy: str = "half_threshold",
) -> EvalReport:
    """Mean squared error between ANN and SNN logits at each T.

    The spiking run uses the neuron kind and member count tagged on ``snn``.
    """
    validate_model(ann)
    validate_model(snn)
    if len(ann.layers) != len(snn.layers) or any(
        a.kind != b.kind
        or (a.weights is None) != (b.weights is None)
        or (a.weights is not None and a.weights.shape != b.weights.shape)
        for a, b in zip(ann.layers, snn.layers)
    ):
        raise ValueError("ANN and SNN architectures differ")
    X, _ = dataset
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("dataset must be non-empty")
    report = EvalReport()
    if not T_list:
        return report
    ann_logits = ann_forward_batch(ann, X)
    for T in T_list:
        sim = SimConfig.from_model(snn, T=int(T), v0_policy=v0_policy)
        snn_logits = snn_forward_batch(snn, X, sim)
        mse = float(((ann_logits - snn_logits) ** 2).mean())
        report.add(T=int(T), tau=sim.tau, neuron=sim.neuron, metric="mse", value=mse)
    return report


@dataclass(frozen=True)
class LayerAudit:
    """Rate-identity diagnostics for one spiking layer of one run."""

    layer: int
    residual_max: float
    mapping_error_mean: float
    mapping_error_max: float


def phi_residual_audit(model: ModelSpec, x: np.ndarray, sim: SimConfig) -> list[LayerAudit]:
    """Audit the layer-wise rate identity on one input.

    For each spiking layer, the average postsynaptic potential must equal the
    layer's affine map applied to the previous spiking layer's average rate
    (or to the raw input), minus the membrane drift (v_end - v_start) / T.
    The residual is algebraically zero; the drift term itself is the
    T-dependent mapping error of rate coding.
    """
    _, trace = snn_forward(model, x, sim)
    audits = []
    prev_phi = np.asarray(x, dtype=np.float64)
    prev_index = -1
    for layer_index in trace.spiking_layers:
        unit = trace.spike_units[layer_index]
        observed = phi(trace, layer_index, unit, sim.T)
        expected_input = prev_phi[None]
        for mid in range(prev_index + 1, layer_index + 1):
            expected_input = apply_layer_linear(model.layers[mid], expected_input)
        drift = (trace.v_end[layer_index] - trace.v_start[layer_index]) / sim.T
        residual = observed - (expected_input[0] - drift)
        audits.append(
            LayerAudit(
                layer=layer_index,
                residual_max=float(np.abs(residual).max()),
                mapping_error_mean=float(np.abs(drift).mean()),
                mapping_error_max=float(np.abs(drift).max()),
            )
        )
        prev_phi = observed
        prev_index = layer_index
    return audits

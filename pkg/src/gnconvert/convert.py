"""Turn a trained quantized-activation model into a spiking one.

Conversion is a pure re-tagging: each activated layer's output ceiling
becomes the firing threshold of the spiking layer that replaces its
activation, and a second pass swaps those IF neurons for group neurons of a
chosen member count. Weights and biases are never touched.
"""

from __future__ import annotations

from .model import ModelSpec, copy_model, validate_model


def ann_to_snn(model: ModelSpec) -> ModelSpec:
    """Tag every activated layer as an IF spiking layer with theta = lam."""
    validate_model(model)
    out = copy_model(model)
    for i, layer in enumerate(out.layers):
        if layer.act is not None:
            if not layer.act.lam > 0:
                raise ValueError(f"layer {i} ({layer.kind}): missing positive lambda")
            layer.theta = layer.act.lam
            layer.tau = None
    validate_model(out)
    return out


def replace_if_with_gn(model: ModelSpec, tau: int) -> ModelSpec:
    """Replace every IF layer with a group neuron of ``tau`` members.

    Each spiking layer keeps its threshold theta and gains the member count;
    member thresholds i*theta/tau and the per-spike weight theta/tau are
    derived from those two numbers at simulation time. ``tau`` is global, and
    re-applying the replacement with the same value is a no-op.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    validate_model(model)
    out = copy_model(model)
    for i, layer in enumerate(out.layers):
        if layer.act is not None:
            if layer.theta is None:
                raise ValueError(
                    f"layer {i} ({layer.kind}): not an IF spiking layer; run ann_to_snn first"
                )
            layer.tau = tau
    validate_model(out)
    return out


def convert(model: ModelSpec, tau: int) -> ModelSpec:
    """Full pipeline: assign thresholds, then group the IF neurons."""
    return replace_if_with_gn(ann_to_snn(model), tau)

"""gnconvert: one weight graph, two execution semantics.

Train a dense network with quantized clip-floor-shift activations, run it
either as that ANN or as a time-stepped spiking network (integrate-and-fire
or group neurons), and convert between the two by threshold re-tagging.
"""

__version__ = "0.1.0"

from .activations import QCFSParams, qcfs, relu
from .analysis import (
    EvalReport,
    LayerAudit,
    ReportRow,
    accuracy_eval,
    conversion_mse,
    curve_grid,
    firing_rate_curve,
    phi_residual_audit,
    report_filename,
    riser_positions,
)
from .convert import ann_to_snn, convert, replace_if_with_gn
from .datasets import gaussian_blobs, load_csv, load_idx_images, load_idx_labels, save_csv
from .estimators import QCFSNetClassifier, SpikingNetClassifier
from .model import (
    LayerSpec,
    ModelSpec,
    ModelValidationError,
    load_model,
    model_from_json,
    model_hash,
    model_to_json,
    save_model,
    validate_model,
)
from .network import (
    SimConfig,
    Trace,
    ann_forward,
    ann_forward_batch,
    phi,
    snn_forward,
    snn_forward_batch,
)
from .neurons import (
    GNConfig,
    GNState,
    IFConfig,
    IFState,
    SpikeOut,
    closed_form_gn_rate,
    closed_form_if_rate,
    gn_step,
    gn_step_memberloop,
    if_step,
)
from .train import TrainConfig, calibrate_lambda, qcfs_ste_grad, train

__all__ = [
    "QCFSParams", "qcfs", "relu",
    "EvalReport", "LayerAudit", "ReportRow", "accuracy_eval", "conversion_mse",
    "curve_grid", "firing_rate_curve", "phi_residual_audit", "report_filename",
    "riser_positions",
    "ann_to_snn", "convert", "replace_if_with_gn",
    "gaussian_blobs", "load_csv", "load_idx_images", "load_idx_labels", "save_csv",
    "QCFSNetClassifier", "SpikingNetClassifier",
    "LayerSpec", "ModelSpec", "ModelValidationError", "load_model", "model_from_json",
    "model_hash", "model_to_json", "save_model", "validate_model",
    "SimConfig", "Trace", "ann_forward", "ann_forward_batch", "phi",
    "snn_forward", "snn_forward_batch",
    "GNConfig", "GNState", "IFConfig", "IFState", "SpikeOut",
    "closed_form_gn_rate", "closed_form_if_rate", "gn_step", "gn_step_memberloop",
    "if_step",
    "TrainConfig", "calibrate_lambda", "qcfs_ste_grad", "train",
]

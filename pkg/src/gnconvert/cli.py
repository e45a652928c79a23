"""Command-line pipeline: train, convert, eval, curve.

Config precedence is flags > GNCONVERT_* environment variables > defaults.
Exit codes: 0 success, 1 runtime failure, 2 usage error. Diagnostics go to
stderr; data goes to files or stdout only.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    EvalReport,
    accuracy_eval,
    conversion_mse,
    curve_grid,
    firing_rate_curve,
    phi_residual_audit,
    report_filename,
)
from .convert import ann_to_snn, replace_if_with_gn
from .datasets import gaussian_blobs, load_csv, load_idx_images, load_idx_labels
from .model import copy_model, load_model, model_hash, save_model
from .network import SimConfig
from .train import TrainConfig, train


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 2."""


def _env(name: str, cast, default):
    raw = os.environ.get(f"GNCONVERT_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad GNCONVERT_{name} value {raw!r}: {exc}") from exc


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated integers, got {text!r}") from exc
    if not values:
        raise UsageError(f"{flag} must list at least one value")
    return values


def _add_dataset_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--synthetic", choices=["blobs"], help="use a built-in synthetic dataset")
    sub.add_argument("--csv", help="label,features... CSV dataset path")
    sub.add_argument("--idx-images", help="IDX image file path")
    sub.add_argument("--idx-labels", help="IDX label file path")
    sub.add_argument("--samples", type=int, default=_env("SAMPLES", int, 512),
                     help="synthetic sample count")
    sub.add_argument("--std", type=float, default=_env("STD", float, 1.0),
                     help="synthetic cluster standard deviation")


def _load_dataset(args) -> tuple[np.ndarray, np.ndarray]:
    sources = [args.synthetic is not None, args.csv is not None,
               args.idx_images is not None or args.idx_labels is not None]
    if sum(sources) != 1:
        raise UsageError("pick exactly one dataset source: --synthetic, --csv, or --idx-*")
    if args.synthetic:
        return gaussian_blobs(n_samples=args.samples, std=args.std, seed=args.seed)
    if args.csv:
        return load_csv(args.csv)
    if not (args.idx_images and args.idx_labels):
        raise UsageError("IDX input needs both --idx-images and --idx-labels")
    return load_idx_images(args.idx_images), load_idx_labels(args.idx_labels)


def cmd_train(args) -> int:
    widths = tuple(_parse_int_list(args.arch, "--arch"))
    X, y = _load_dataset(args)
    if widths[0] != X.shape[1]:
        raise UsageError(f"--arch input width {widths[0]} != dataset features {X.shape[1]}")
    n_classes = int(y.max()) + 1 if len(y) else 0
    if widths[-1] < n_classes:
        raise UsageError(f"--arch output width {widths[-1]} < {n_classes} dataset classes")
    cfg = TrainConfig(
        architecture=widths,
        levels=args.L,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    model = train((X, y), cfg)
    save_model(model, args.output)
    _log(f"trained {'-'.join(map(str, widths))} model -> {args.output}")
    return 0


def cmd_convert(args) -> int:
    if args.tau < 1:
        raise UsageError(f"--tau must be >= 1, got {args.tau}")
    model = load_model(args.model)
    converted = replace_if_with_gn(ann_to_snn(model), args.tau)
    save_model(converted, args.output)
    _log(f"converted {args.model} (tau={args.tau}) -> {args.output}")
    return 0


def _retag(model, neuron: str | None, tau: int | None):
    """Apply --neuron/--tau evaluation overrides to a converted model."""
    if neuron is None and tau is None:
        return model
    out = copy_model(model)
    if neuron == "if":
        if tau is not None:
            raise UsageError("--tau conflicts with --neuron if")
        for layer in out.layers:
            layer.tau = None
        return out
    if tau is not None:
        if tau < 1:
            raise UsageError(f"--tau must be >= 1, got {tau}")
        return replace_if_with_gn(out, tau)
    if any(layer.tau is not None for layer in out.layers):
        return out
    raise UsageError("--neuron gn needs --tau (or a tau-tagged model)")


def _emit_report(report: EvalReport, args, model_digest: str, T_list, neuron: str,
                 tau: int | None, metric: str) -> None:
    if args.output == "-":
        sys.stdout.write(report.to_csv())
        return
    formats = ["csv", "json"] if args.format == "both" else [args.format]
    for ext in formats:
        path = args.output
        if path is None:
            path = os.path.join(args.out_dir, report_filename(model_digest, neuron, tau,
                                                              T_list, metric, ext))
        else:
            path = f"{path}.{ext}" if not path.endswith(f".{ext}") else path
        text = report.to_csv() if ext == "csv" else report.to_json()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        _log(f"wrote {path}")


def cmd_eval(args) -> int:
    model = load_model(args.model)
    if not any(layer.theta is not None for layer in model.layers) and any(
        layer.act is not None for layer in model.layers
    ):
        raise UsageError(f"{args.model} is not converted; run `gnconvert convert` first")
    model = _retag(model, args.neuron, args.tau)
    T_list = _parse_int_list(args.T, "--T")
    if any(t < 1 for t in T_list):
        raise UsageError("--T values must be >= 1")
    dataset = _load_dataset(args)
    probe = SimConfig.from_model(model, T=T_list[0], v0_policy=args.v0)
    report = EvalReport()
    if args.metric == "accuracy":
        for T in T_list:
            sim = SimConfig.from_model(model, T=T, v0_policy=args.v0)
            value = accuracy_eval(model, dataset, sim)
            report.add(T=T, tau=sim.tau, neuron=sim.neuron, metric="accuracy", value=value)
    elif args.metric == "mse":
        if not args.ann:
            raise UsageError("--metric mse needs --ann with the source model")
        ann = load_model(args.ann)
        report = conversion_mse(ann, model, dataset, T_list, v0_policy=args.v0)
    else:
        X, _ = dataset
        n_probe = min(8, X.shape[0])
        for T in T_list:
            sim = SimConfig.from_model(model, T=T, v0_policy=args.v0)
            worst = 0.0
            for row in X[:n_probe]:
                audits = phi_residual_audit(model, row, sim)
                worst = max(worst, max(a.residual_max for a in audits))
            report.add(T=T, tau=sim.tau, neuron=sim.neuron, metric="phi_residual_max",
                       value=worst)
    _emit_report(report, args, model_hash(model), T_list, probe.neuron, probe.tau, args.metric)
    return 0


def cmd_curve(args) -> int:
    if args.theta <= 0:
        raise UsageError(f"--theta must be positive, got {args.theta}")
    if args.T < 1:
        raise UsageError(f"--T must be >= 1, got {args.T}")
    if args.neuron == "gn" and args.tau < 1:
        raise UsageError(f"--tau must be >= 1, got {args.tau}")
    tau = args.tau if args.neuron == "gn" else 1
    grid = curve_grid(args.theta, tau, args.T, points=args.points)
    curve = firing_rate_curve(args.neuron, args.theta, tau if args.neuron == "gn" else None,
                              args.T, args.v0, grid)
    lines = ["x,rate"] + [f"{float(x)!r},{float(rate)!r}" for x, rate in curve]
    text = "\n".join(lines) + "\n"
    if args.output is None or args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        _log(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnconvert",
        description="Train quantized-activation networks, convert them to spiking "
                    "networks with group neurons, and evaluate the conversion.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a QCFS network and write a model file")
    _add_dataset_flags(p_train)
    p_train.add_argument("--arch", default=_env("ARCH", str, "2,16,2"),
                         help="comma-separated layer widths, input to output")
    p_train.add_argument("--L", type=int, default=_env("L", int, 4),
                         help="activation quantization level")
    p_train.add_argument("--epochs", type=int, default=_env("EPOCHS", int, 60))
    p_train.add_argument("--lr", type=float, default=_env("LR", float, 0.1))
    p_train.add_argument("--batch-size", type=int, default=_env("BATCH_SIZE", int, 32))
    p_train.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    p_train.add_argument("-o", "--output", required=True, help="output model JSON path")
    p_train.set_defaults(func=cmd_train)

    p_convert = sub.add_parser("convert", help="assign spiking thresholds and group neurons")
    p_convert.add_argument("model", help="trained model JSON path")
    p_convert.add_argument("--tau", type=int, required=True,
                           help="group-neuron member count (1 = plain IF)")
    p_convert.add_argument("-o", "--output", required=True, help="output model JSON path")
    p_convert.set_defaults(func=cmd_convert)

    p_eval = sub.add_parser("eval", help="evaluate a converted model and write a report")
    p_eval.add_argument("model", help="converted model JSON path")
    _add_dataset_flags(p_eval)
    p_eval.add_argument("--T", default=_env("T", str, "1,2,4,8"),
                        help="comma-separated time-step counts")
    p_eval.add_argument("--metric", choices=["accuracy", "mse", "phi"], default="accuracy")
    p_eval.add_argument("--ann", help="source model JSON (required for --metric mse)")
    p_eval.add_argument("--neuron", choices=["if", "gn"], help="override the model's neuron kind")
    p_eval.add_argument("--tau", type=int, default=None, help="override the member count")
    p_eval.add_argument("--v0", choices=["zero", "half_threshold"],
                        default=_env("V0", str, "half_threshold"))
    p_eval.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    p_eval.add_argument("-o", "--output", default=None,
                        help="report base path, or '-' for CSV on stdout "
                             "(default: auto-named files in --out-dir)")
    p_eval.add_argument("--out-dir", default=".", help="directory for auto-named reports")
    p_eval.add_argument("--format", choices=["csv", "json", "both"], default="both")
    p_eval.set_defaults(func=cmd_eval)

    p_curve = sub.add_parser("curve", help="emit a firing-rate staircase as CSV")
    p_curve.add_argument("--neuron", choices=["if", "gn"], required=True)
    p_curve.add_argument("--theta", type=float, default=_env("THETA", float, 1.0))
    p_curve.add_argument("--tau", type=int, default=_env("TAU", int, 4))
    p_curve.add_argument("--T", type=int, default=_env("T", int, 4))
    p_curve.add_argument("--v0", choices=["zero", "half_threshold"],
                         default=_env("V0", str, "half_threshold"))
    p_curve.add_argument("--points", type=int, default=_env("POINTS", int, 2048),
                         help="uniform grid size before breakpoint injection")
    p_curve.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    p_curve.set_defaults(func=cmd_curve)

    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
    except UsageError as exc:
        _log(f"error: {exc}")
        return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return 2
    except (OSError, ValueError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Dataset ingestion: synthetic blobs, CSV, and IDX readers."""

from __future__ import annotations

import gzip
import struct

import numpy as np

IDX_MAGIC_LABELS = 0x00000801
IDX_MAGIC_IMAGES = 0x00000803


def gaussian_blobs(
    n_samples: int = 512,
    centers=((-2.0, -1.0), (2.0, 1.0)),
    std: float = 1.0,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded 2-D Gaussian blobs, one cluster per class.

    Samples are split as evenly as possible across the clusters and returned
    in a seeded shuffle, so the class mix is stable under slicing.
    """
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != 2:
        raise ValueError("centers must be a sequence of 2-D points")
    if n_samples < len(centers):
        raise ValueError("need at least one sample per center")
    rng = np.random.default_rng(seed)
    per_class = [n_samples // len(centers)] * len(centers)
    for i in range(n_samples % len(centers)):
        per_class[i] += 1
    xs, ys = [], []
    for label, (center, n) in enumerate(zip(centers, per_class)):
        xs.append(center + rng.normal(0.0, std, size=(n, 2)))
        ys.append(np.full(n, label, dtype=np.int64))
    X = np.concatenate(xs)
    y = np.concatenate(ys)
    order = rng.permutation(n_samples)
    return X[order], y[order]


def load_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a label,features... CSV into (X, y)."""
    rows = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if rows.shape[1] < 2:
        raise ValueError("CSV rows need a label plus at least one feature")
    y = rows[:, 0]
    if not np.array_equal(y, np.round(y)):
        raise ValueError("labels (first CSV column) must be integers")
    return rows[:, 1:], y.astype(np.int64)


def save_csv(path, X: np.ndarray, y: np.ndarray) -> None:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y row counts differ")
    with open(path, "w", encoding="utf-8") as fh:
        for label, row in zip(y, X):
            fh.write(",".join([str(int(label))] + [repr(float(v)) for v in row]) + "\n")


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx_labels(path) -> np.ndarray:
    """Read an IDX label file (big-endian, magic 0x00000801)."""
    with _open_maybe_gzip(path) as fh:
        magic, count = struct.unpack(">II", fh.read(8))
        if magic != IDX_MAGIC_LABELS:
            raise ValueError(f"bad IDX label magic 0x{magic:08x} in {path}")
        data = fh.read(count)
    if len(data) != count:
        raise ValueError(f"truncated IDX label file {path}")
    return np.frombuffer(data, dtype=np.uint8).astype(np.int64)


def load_idx_images(path, flatten: bool = True, normalize: bool = True) -> np.ndarray:
    """Read an IDX image file (big-endian, magic 0x00000803).

    Pixels come back as float64, scaled to [0, 1] unless ``normalize`` is
    off; ``flatten`` collapses each image to one row.
    """
    with _open_maybe_gzip(path) as fh:
        magic, count, rows, cols = struct.unpack(">IIII", fh.read(16))
        if magic != IDX_MAGIC_IMAGES:
            raise ValueError(f"bad IDX image magic 0x{magic:08x} in {path}")
        data = fh.read(count * rows * cols)
    if len(data) != count * rows * cols:
        raise ValueError(f"truncated IDX image file {path}")
    images = np.frombuffer(data, dtype=np.uint8).reshape(count, rows, cols).astype(np.float64)
    if normalize:
        images /= 255.0
    return images.reshape(count, rows * cols) if flatten else images

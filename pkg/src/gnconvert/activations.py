"""Activation functions for the non-spiking execution path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QCFSParams:
    """Parameters of the quantized clip-floor-shift (QCFS) activation.

    ``lam`` is the output ceiling and ``levels`` the number of quantization
    steps, so outputs land on {0, lam/levels, 2*lam/levels, ..., lam}.
    """

    lam: float
    levels: int

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")


def qcfs(z, params: QCFSParams):
    """Quantize pre-activations to ``levels + 1`` evenly spaced values in [0, lam].

    Accepts scalars or arrays. The half-step shift centers each quantization
    bin on its output value; an input landing exactly on a bin edge takes the
    upper step, matching spiking neurons that fire at threshold equality.
    """
    lam = params.lam
    levels = params.levels
    scaled = np.floor(np.asarray(z, dtype=np.float64) * levels / lam + 0.5)
    out = lam * np.clip(scaled / levels, 0.0, 1.0)
    return out if out.ndim else float(out)


def relu(z):
    """max(0, z), elementwise on arrays."""
    out = np.maximum(np.asarray(z, dtype=np.float64), 0.0)
    return out if out.ndim else float(out)

"""Trajectory probes: normalized singular spectra and input-output
feature decorrelation."""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionError, ShapeError, UnsupportedConfigError
from ..kdcore import ProjectorState
from ..linalg import VARIANCE_FLOOR, Matrix, as_matrix, svd


def record_spectrum(p: ProjectorState) -> np.ndarray:
    """Descending singular values of a linear projector, scaled by sigma_max."""
    if not p.is_linear:
        raise UnsupportedConfigError(
            "spectrum recording is defined for linear projectors only"
        )
    sigma = svd(p.layers[0]).singular_values
    smax = float(sigma[0]) if sigma.size else 0.0
    return sigma / smax if smax > 0.0 else sigma.copy()


def correlation_table(x: Matrix, y: Matrix) -> Matrix:
    """|Pearson| between every column of x and every column of y.

    Columns with variance below the degenerate floor correlate 0 with
    everything, matching the scalar pearson convention.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"batch sizes differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise PreconditionError(f"need batch size >= 2, got {x.shape[0]}")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    vx = np.mean(xc * xc, axis=0)
    vy = np.mean(yc * yc, axis=0)
    sx = np.where(vx < VARIANCE_FLOOR, np.inf, np.sqrt(vx))
    sy = np.where(vy < VARIANCE_FLOOR, np.inf, np.sqrt(vy))
    table = (xc / sx).T @ (yc / sy) / x.shape[0]
    return np.abs(np.clip(table, -1.0, 1.0))


def decorrelation(inputs: Matrix, outputs: Matrix, reduce: str = "max") -> float:
    """Mean over output features of the max (or mean) |Pearson| against
    any input feature. 1 means every output is explained by some input;
    values near 0 mean the map decorrelated its output from its input.
    """
    if reduce not in ("max", "mean"):
        raise PreconditionError(f"reduce must be 'max' or 'mean', got {reduce!r}")
    table = correlation_table(inputs, outputs)
    per_output = table.max(axis=0) if reduce == "max" else table.mean(axis=0)
    return float(per_output.mean())

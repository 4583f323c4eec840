"""Representation normalization schemes and their exact backward passes.

Four schemes: none, l2_row (per-row unit norm), batch (per-column
standardization, biased variance, no affine parameters), and group
(batch formula with statistics pooled over feature groups).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError, ShapeError
from ..linalg import Matrix, as_matrix

NORM_KINDS = ("none", "l2_row", "batch", "group")

# Rows with Euclidean norm below this are left unnormalized (and flagged).
ROW_NORM_FLOOR = 1e-12


class DegenerateRowWarning(UserWarning):
    """Raised when l2_row meets rows too short to normalize."""


@dataclass(frozen=True)
class NormScheme:
    """Which normalization to apply to a feature batch.

    epsilon is the variance regularizer of the batch/group formulas;
    groups is the group count for kind="group" and must divide the
    feature dimension.
    """

    kind: str = "batch"
    epsilon: float = 1e-4
    groups: int = 4

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise PreconditionError(f"unknown normalization kind {self.kind!r}")
        if not self.epsilon > 0.0:
            raise PreconditionError(f"epsilon must be > 0, got {self.epsilon}")
        if self.kind == "group" and self.groups < 1:
            raise PreconditionError(f"groups must be >= 1, got {self.groups}")


def _require_batch(z: Matrix, scheme: NormScheme) -> None:
    if z.shape[0] < 2:
        raise PreconditionError(
            f"{scheme.kind} normalization needs batch size >= 2, got {z.shape[0]}"
        )


def _group_shape(z: Matrix, scheme: NormScheme) -> tuple[int, int, int]:
    b, d = z.shape
    if d % scheme.groups != 0:
        raise PreconditionError(
            f"groups={scheme.groups} does not divide feature dim {d}"
        )
    return b, scheme.groups, d // scheme.groups


def normalize(z: Matrix, scheme: NormScheme) -> Matrix:
    """Apply the scheme to a B x d feature batch."""
    z = as_matrix(z, "z")
    if z.size == 0:
        raise ShapeError(f"cannot normalize empty matrix {z.shape}")
    if scheme.kind == "none":
        return z
    if scheme.kind == "l2_row":
        norms = np.sqrt(np.sum(z * z, axis=1))
        degenerate = norms < ROW_NORM_FLOOR
        if np.any(degenerate):
            warnings.warn(
                f"{int(degenerate.sum())} row(s) below norm floor left unnormalized",
                DegenerateRowWarning,
                stacklevel=2,
            )
        safe = np.where(degenerate, 1.0, norms)
        return z / safe[:, None]
    if scheme.kind == "batch":
        _require_batch(z, scheme)
        mu = z.mean(axis=0)
        var = z.var(axis=0)  # biased, matching the no-affine formula
        return (z - mu) / np.sqrt(var + scheme.epsilon)
    # group: pool mean/variance over all entries of each feature group
    _require_batch(z, scheme)
    b, g, size = _group_shape(z, scheme)
    zg = z.reshape(b, g, size)
    mu = zg.mean(axis=(0, 2), keepdims=True)
    var = zg.var(axis=(0, 2), keepdims=True)
    return ((zg - mu) / np.sqrt(var + scheme.epsilon)).reshape(b, -1)


def normalize_vjp(z: Matrix, scheme: NormScheme, upstream: Matrix) -> Matrix:
    """Exact gradient of normalize contracted with an upstream cotangent.

    Includes the mean/variance terms of the batch and group Jacobians.
    """
    z = as_matrix(z, "z")
    g = as_matrix(upstream, "upstream")
    if z.shape != g.shape:
        raise ShapeError(f"upstream shape {g.shape} != input shape {z.shape}")
    if z.size == 0:
        raise ShapeError(f"cannot normalize empty matrix {z.shape}")
    if scheme.kind == "none":
        return g
    if scheme.kind == "l2_row":
        norms = np.sqrt(np.sum(z * z, axis=1))
        degenerate = norms < ROW_NORM_FLOOR
        safe = np.where(degenerate, 1.0, norms)
        y = z / safe[:, None]
        proj = np.sum(g * y, axis=1, keepdims=True)
        out = (g - y * proj) / safe[:, None]
        if np.any(degenerate):
            out[degenerate] = g[degenerate]
        return out
    if scheme.kind == "batch":
        _require_batch(z, scheme)
        mu = z.mean(axis=0)
        var = z.var(axis=0)
        s = np.sqrt(var + scheme.epsilon)
        y = (z - mu) / s
        return (g - g.mean(axis=0) - y * np.mean(g * y, axis=0)) / s
    _require_batch(z, scheme)
    b, grp, size = _group_shape(z, scheme)
    zg = z.reshape(b, grp, size)
    gg = g.reshape(b, grp, size)
    mu = zg.mean(axis=(0, 2), keepdims=True)
    var = zg.var(axis=(0, 2), keepdims=True)
    s = np.sqrt(var + scheme.epsilon)
    y = (zg - mu) / s
    out = (gg - gg.mean(axis=(0, 2), keepdims=True)
           - y * np.mean(gg * y, axis=(0, 2), keepdims=True)) / s
    return out.reshape(b, -1)

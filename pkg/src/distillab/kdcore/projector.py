"""Bias-free projector: a single linear map or a ReLU MLP stack."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError, ShapeError
from ..linalg import Matrix, Rng, as_matrix, check_finite
from ..matrixio import matrix_from_bytes, matrix_to_bytes

# Paper-style default hidden width for MLP projectors.
DEFAULT_HIDDEN_WIDTH = 1024


@dataclass(frozen=True)
class ProjectorState:
    """Projector weights. layers[k] maps dim k to dim k+1; no biases.

    A linear projector is exactly one layer with no activation; MLP
    stacks apply ReLU between consecutive layers (never after the last).
    """

    layers: tuple = field()
    activation: str = "relu"

    def __post_init__(self):
        if len(self.layers) < 1:
            raise PreconditionError("projector needs at least one layer")
        if self.activation != "relu":
            raise PreconditionError(f"unsupported activation {self.activation!r}")
        layers = tuple(as_matrix(w, f"layer {i}") for i, w in enumerate(self.layers))
        object.__setattr__(self, "layers", layers)
        for i in range(len(layers) - 1):
            if layers[i].shape[1] != layers[i + 1].shape[0]:
                raise ShapeError(
                    f"layer {i} output dim {layers[i].shape[1]} != "
                    f"layer {i + 1} input dim {layers[i + 1].shape[0]}"
                )

    @property
    def is_linear(self) -> bool:
        return len(self.layers) == 1

    @property
    def input_dim(self) -> int:
        return self.layers[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].shape[1]

    def with_layers(self, layers) -> "ProjectorState":
        return ProjectorState(tuple(layers), self.activation)

    @staticmethod
    def linear(w: Matrix) -> "ProjectorState":
        return ProjectorState((w,))

    @staticmethod
    def mlp(layers) -> "ProjectorState":
        return ProjectorState(tuple(layers))


def linear_init(rng: Rng, in_dim: int, out_dim: int) -> ProjectorState:
    """Near-orthogonal linear projector (orthonormal rows or columns)."""
    if in_dim <= out_dim:
        w = rng.orthonormal_columns(out_dim, in_dim).T
    else:
        w = rng.orthonormal_columns(in_dim, out_dim)
    return ProjectorState.linear(np.ascontiguousarray(w))


def mlp_init(rng: Rng, in_dim: int, out_dim: int, depth: int,
             hidden_width: int = DEFAULT_HIDDEN_WIDTH) -> ProjectorState:
    """Depth = number of weight matrices; He-scaled Gaussian entries."""
    if depth < 1:
        raise PreconditionError(f"depth must be >= 1, got {depth}")
    if depth == 1:
        return linear_init(rng, in_dim, out_dim)
    dims = [in_dim] + [hidden_width] * (depth - 1) + [out_dim]
    layers = [rng.matrix(dims[i], dims[i + 1], scale=np.sqrt(2.0 / dims[i]))
              for i in range(depth)]
    return ProjectorState.mlp(layers)


def project(zs: Matrix, p: ProjectorState) -> Matrix:
    """Forward pass: alternating matmul / ReLU, ending with a matmul."""
    out, _ = project_with_tape(zs, p)
    return out


def project_with_tape(zs: Matrix, p: ProjectorState):
    """Forward pass that keeps the per-layer inputs for the backward pass."""
    h = as_matrix(zs, "zs")
    if h.shape[1] != p.input_dim:
        raise ShapeError(
            f"input dim {h.shape[1]} != projector input dim {p.input_dim}"
        )
    inputs = []
    for i, w in enumerate(p.layers):
        inputs.append(h)
        h = h @ w
        if i < len(p.layers) - 1:
            h = np.maximum(h, 0.0)
    return check_finite(h, "projector output"), inputs


def project_vjp(p: ProjectorState, tape, upstream: Matrix):
    """Gradients of sum(upstream * project(zs)) w.r.t. zs and every layer."""
    g = as_matrix(upstream, "upstream")
    layer_grads = [None] * len(p.layers)
    for i in range(len(p.layers) - 1, -1, -1):
        inp = tape[i]
        if i < len(p.layers) - 1:
            # upstream arrives post-ReLU of layer i; mask by the sign of
            # the pre-activation inp @ w (ReLU'(0) taken as 0)
            pre = inp @ p.layers[i]
            g = g * (pre > 0.0)
        layer_grads[i] = inp.T @ g
        g = g @ p.layers[i].T
    return g, tuple(layer_grads)


def projector_to_bytes(p: ProjectorState) -> bytes:
    """Concatenated framed binary matrices, one frame per layer."""
    return b"".join(matrix_to_bytes(w) for w in p.layers)


def projector_from_bytes(buf: bytes) -> ProjectorState:
    layers = []
    offset = 0
    while offset < len(buf):
        rows, cols = np.frombuffer(buf, dtype="<u8", count=2, offset=offset)
        frame = 16 + int(rows) * int(cols) * 8
        layers.append(matrix_from_bytes(buf[offset:offset + frame], "projector layer"))
        offset += frame
    return ProjectorState(tuple(layers))

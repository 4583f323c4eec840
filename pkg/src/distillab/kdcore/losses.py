"""Distillation and task losses with analytic gradients.

The canonical feature pipeline projects the student batch, then applies
the chosen normalization jointly to the projected-student and teacher
branches, then evaluates the distance. Flags expose the ablations:
teacher-only normalization, and normalizing the student before rather
than after projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError, ShapeError
from ..linalg import Matrix, as_matrix
from .distances import DistanceSpec, distance, distance_grad
from .norms import NormScheme, normalize, normalize_vjp
from .projector import ProjectorState, project_vjp, project_with_tape


@dataclass(frozen=True)
class LossBreakdown:
    """Task + distillation composition; total is the exact unweighted sum."""

    task_loss: float
    distill_loss: float

    @property
    def total(self) -> float:
        return self.task_loss + self.distill_loss


@dataclass(frozen=True)
class DistillResult:
    """Scalar distillation loss plus gradients for the student branch.

    grad_zs is d(loss)/d(student features); grad_layers matches the
    projector's layer tuple. projected is the raw projector output
    (pre-normalization), kept for decorrelation probes.
    """

    loss: float
    grad_zs: Matrix
    grad_layers: tuple
    projected: Matrix


def distill_loss(zs: Matrix, zt: Matrix, p: ProjectorState, norm: NormScheme,
                 spec: DistanceSpec, normalize_student: bool = True,
                 student_norm_order: str = "post") -> DistillResult:
    """D(normalize(project(zs)), normalize(zt)) and its gradients.

    normalize_student=False leaves the student branch raw (teacher-only
    ablation). student_norm_order="pre" normalizes the student features
    before projection instead of after.
    """
    zs = as_matrix(zs, "zs")
    zt = as_matrix(zt, "zt")
    if zs.shape[0] != zt.shape[0]:
        raise ShapeError(f"batch sizes differ: zs {zs.shape[0]} vs zt {zt.shape[0]}")
    if student_norm_order not in ("post", "pre"):
        raise InputError(f"student_norm_order must be 'post' or 'pre', got {student_norm_order!r}")

    pre_norm = normalize_student and student_norm_order == "pre"
    post_norm = normalize_student and student_norm_order == "post"

    zs_in = normalize(zs, norm) if pre_norm else zs
    out, tape = project_with_tape(zs_in, p)
    a = normalize(out, norm) if post_norm else out
    b = normalize(zt, norm)

    loss = distance(a, b, spec)
    ga = distance_grad(a, b, spec)
    g_out = normalize_vjp(out, norm, ga) if post_norm else ga
    g_zs_in, grad_layers = project_vjp(p, tape, g_out)
    grad_zs = normalize_vjp(zs, norm, g_zs_in) if pre_norm else g_zs_in
    return DistillResult(loss, grad_zs, grad_layers, out)


def task_loss(logits: Matrix, labels) -> tuple[float, Matrix]:
    """Mean softmax cross-entropy and its gradient (softmax - onehot) / B."""
    logits = as_matrix(logits, "logits")
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    b, c = logits.shape
    if y.shape[0] != b:
        raise ShapeError(f"labels length {y.shape[0]} != batch size {b}")
    if y.size and (y.min() < 0 or y.max() >= c):
        raise InputError(f"labels must lie in [0, {c}), got range [{y.min()}, {y.max()}]")
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    lse = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True)) + m
    loss = float(np.mean(lse[:, 0] - logits[np.arange(b), y]))
    softmax = np.exp(logits - lse)
    grad = softmax
    grad[np.arange(b), y] -= 1.0
    return loss, grad / b

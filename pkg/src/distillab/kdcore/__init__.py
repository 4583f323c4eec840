"""Distillation loss kernel: normalizations, projector, distances, losses."""

from .distances import DISTANCE_KINDS, DistanceSpec, distance, distance_grad
from .losses import DistillResult, LossBreakdown, distill_loss, task_loss
from .norms import (
    NORM_KINDS,
    DegenerateRowWarning,
    NormScheme,
    normalize,
    normalize_vjp,
)
from .projector import (
    DEFAULT_HIDDEN_WIDTH,
    ProjectorState,
    linear_init,
    mlp_init,
    project,
    project_vjp,
    project_with_tape,
    projector_from_bytes,
    projector_to_bytes,
)

__all__ = [
    "DISTANCE_KINDS",
    "NORM_KINDS",
    "DEFAULT_HIDDEN_WIDTH",
    "DegenerateRowWarning",
    "DistanceSpec",
    "DistillResult",
    "LossBreakdown",
    "NormScheme",
    "ProjectorState",
    "distance",
    "distance_grad",
    "distill_loss",
    "linear_init",
    "mlp_init",
    "normalize",
    "normalize_vjp",
    "project",
    "project_vjp",
    "project_with_tape",
    "projector_from_bytes",
    "projector_to_bytes",
    "task_loss",
]

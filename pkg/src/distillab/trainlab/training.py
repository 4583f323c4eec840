"""Joint student + projector SGD against a frozen teacher."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..dynamics.probes import decorrelation, record_spectrum
from ..dynamics.trajectory import TrajectoryRecord
from ..errors import NumericError, PreconditionError
from ..kdcore import (
    DistanceSpec,
    LossBreakdown,
    NormScheme,
    ProjectorState,
    distill_loss,
    linear_init,
    mlp_init,
    task_loss,
)
from ..linalg import Matrix, Rng
from .nets import ToyNet
from .tasks import HEAD_STREAM, PROJECTOR_STREAM, STUDENT_STREAM, SyntheticTask


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything a seeded run needs. Dimensions are lab choices, not
    paper values; dt >= ds models the capacity gap."""

    input_dim: int = 16
    student_dim: int = 32
    teacher_dim: int = 64
    student_hidden: int = 48
    student_depth: int = 2
    teacher_hidden: int = 96
    teacher_depth: int = 2
    n_classes: int = 8
    feature_decay: float = 1.0

    projector_depth: int = 1          # 1 = linear
    projector_hidden: int = 64

    norm: NormScheme = field(default_factory=lambda: NormScheme("batch"))
    distance: DistanceSpec = field(default_factory=lambda: DistanceSpec("frobenius"))
    distill_weight: float = 1.0

    learning_rate: float = 0.02
    weight_decay: float = 0.0
    steps: int = 400
    batch_size: int = 128
    record_every: int = 25
    eval_size: int = 512
    seeds: tuple = (0,)

    def __post_init__(self):
        if self.teacher_dim < self.student_dim:
            raise PreconditionError(
                f"capacity gap wants teacher_dim >= student_dim, got "
                f"{self.teacher_dim} < {self.student_dim}"
            )
        if self.batch_size < 2:
            raise PreconditionError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.steps < 1:
            raise PreconditionError(f"steps must be >= 1, got {self.steps}")

    def with_(self, **kw) -> "ExperimentSpec":
        return replace(self, **kw)


@dataclass(frozen=True)
class TrainState:
    student: ToyNet
    head: Matrix
    projector: ProjectorState


@dataclass(frozen=True)
class RunResult:
    trajectory: TrajectoryRecord
    final_accuracy: float
    final_distill_loss: float
    final_breakdown: LossBreakdown
    equivariance: object = None

    def __post_init__(self):
        if not 0.0 <= self.final_accuracy <= 1.0:
            raise PreconditionError(f"accuracy {self.final_accuracy} outside [0, 1]")


def init_state(spec: ExperimentSpec, seed: int) -> tuple[SyntheticTask, TrainState]:
    task = SyntheticTask.create(
        seed, spec.input_dim, spec.teacher_dim, spec.teacher_hidden,
        spec.teacher_depth, spec.n_classes, spec.batch_size, spec.feature_decay,
    )
    rng = Rng(seed)
    dims = [spec.input_dim] + [spec.student_hidden] * (spec.student_depth - 1) \
        + [spec.student_dim]
    student = ToyNet.create(rng.child(STUDENT_STREAM), dims)
    head = rng.child(HEAD_STREAM).matrix(
        spec.student_dim, spec.n_classes, scale=1.0 / np.sqrt(spec.student_dim)
    )
    p_rng = rng.child(PROJECTOR_STREAM)
    if spec.projector_depth == 1:
        projector = linear_init(p_rng, spec.student_dim, spec.teacher_dim)
    else:
        projector = mlp_init(p_rng, spec.student_dim, spec.teacher_dim,
                             spec.projector_depth, spec.projector_hidden)
    return task, TrainState(student, head, projector)


def batch_grads(state: TrainState, x: Matrix, zt: Matrix, labels, spec: ExperimentSpec):
    """Loss breakdown plus gradients for every trainable matrix."""
    zs, tape = state.student.forward_with_tape(x)
    logits = zs @ state.head
    t_loss, g_logits = task_loss(logits, labels)
    d_res = distill_loss(zs, zt, state.projector, spec.norm, spec.distance)
    w = spec.distill_weight
    breakdown = LossBreakdown(t_loss, w * d_res.loss)

    g_head = zs.T @ g_logits
    g_zs = g_logits @ state.head.T + w * d_res.grad_zs
    _, g_student = state.student.vjp(tape, g_zs)
    grads = {
        "student": g_student,
        "head": g_head,
        "projector": tuple(w * g for g in d_res.grad_layers),
    }
    return breakdown, grads, d_res, zs


def apply_sgd(state: TrainState, grads: dict, lr: float, weight_decay: float) -> TrainState:
    decay = 1.0 - weight_decay
    student = state.student.with_layers(
        decay * w - lr * g for w, g in zip(state.student.layers, grads["student"])
    )
    head = decay * state.head - lr * grads["head"]
    projector = state.projector.with_layers(
        decay * w - lr * g for w, g in zip(state.projector.layers, grads["projector"])
    )
    return TrainState(student, head, projector)


def evaluate(state: TrainState, task: SyntheticTask, spec: ExperimentSpec):
    x, zt, labels = task.eval_set(spec.eval_size)
    zs = state.student.forward(x)
    accuracy = float(np.mean(np.argmax(zs @ state.head, axis=1) == labels))
    d_res = distill_loss(zs, zt, state.projector, spec.norm, spec.distance)
    t_loss, _ = task_loss(zs @ state.head, labels)
    return accuracy, d_res.loss, LossBreakdown(t_loss, spec.distill_weight * d_res.loss)


def train(spec: ExperimentSpec, seed: int) -> RunResult:
    """SGD on student trunk + head + projector; teacher frozen throughout.

    Deterministic per (spec, seed). The trajectory records the raw
    (unweighted) distillation distance, the projector spectrum (linear
    projectors only), and input-output decorrelation of the projector.
    """
    task, state = init_state(spec, seed)
    pool = task.input_pool(spec.steps * spec.batch_size)
    record = TrajectoryRecord()
    b = spec.batch_size

    def snapshot(step: int, d_loss: float, zs: Matrix, projected: Matrix) -> None:
        spectrum = record_spectrum(state.projector) if state.projector.is_linear else None
        record.append(step, d_loss, decorrelation(zs, projected), spectrum)

    for t in range(spec.steps):
        x = pool[t * b:(t + 1) * b]
        zt = task.teacher_features(x)
        labels = task.labels(zt)
        breakdown, grads, d_res, zs = batch_grads(state, x, zt, labels, spec)
        if not np.isfinite(breakdown.total):
            raise NumericError(f"training loss diverged at step {t}")
        if t % spec.record_every == 0:
            snapshot(t, d_res.loss, zs, d_res.projected)
        state = apply_sgd(state, grads, spec.learning_rate, spec.weight_decay)

    # final post-update snapshot on the last batch
    zt = task.teacher_features(x)
    d_res = distill_loss(zs_final := state.student.forward(x), zt,
                         state.projector, spec.norm, spec.distance)
    snapshot(spec.steps, d_res.loss, zs_final, d_res.projected)

    accuracy, final_distill, final_breakdown = evaluate(state, task, spec)
    return RunResult(record, accuracy, final_distill, final_breakdown)


def total_loss(state: TrainState, x: Matrix, zt: Matrix, labels, spec: ExperimentSpec) -> float:
    zs = state.student.forward(x)
    t_loss, _ = task_loss(zs @ state.head, labels)
    d_res = distill_loss(zs, zt, state.projector, spec.norm, spec.distance)
    return t_loss + spec.distill_weight * d_res.loss


def _flatten_state(state: TrainState) -> np.ndarray:
    parts = [w.ravel() for w in state.student.layers]
    parts.append(state.head.ravel())
    parts += [w.ravel() for w in state.projector.layers]
    return np.concatenate(parts)


def _unflatten_state(vec: np.ndarray, template: TrainState) -> TrainState:
    mats = []
    offset = 0
    shapes = [w.shape for w in template.student.layers] + [template.head.shape] \
        + [w.shape for w in template.projector.layers]
    for shape in shapes:
        size = int(np.prod(shape))
        mats.append(vec[offset:offset + size].reshape(shape))
        offset += size
    n_student = len(template.student.layers)
    return TrainState(
        ToyNet(mats[:n_student]),
        mats[n_student],
        template.projector.with_layers(mats[n_student + 1:]),
    )


def gradcheck_total_loss(spec: ExperimentSpec, seed: int, h: float = 1e-6,
                         checkpoint_steps: int = 0) -> float:
    """Max relative error between analytic total-loss gradients and central
    finite differences over every trainable parameter, optionally after
    advancing the state by some SGD steps first."""
    task, state = init_state(spec, seed)
    b = spec.batch_size
    pool = task.input_pool((checkpoint_steps + 1) * b)
    for t in range(checkpoint_steps):
        x = pool[t * b:(t + 1) * b]
        zt = task.teacher_features(x)
        _, grads, _, _ = batch_grads(state, x, zt, task.labels(zt), spec)
        state = apply_sgd(state, grads, spec.learning_rate, spec.weight_decay)

    x = pool[checkpoint_steps * b:(checkpoint_steps + 1) * b]
    zt = task.teacher_features(x)
    labels = task.labels(zt)
    _, grads, _, _ = batch_grads(state, x, zt, labels, spec)
    analytic = _flatten_state(TrainState(
        ToyNet(grads["student"]), grads["head"],
        state.projector.with_layers(grads["projector"]),
    ))

    theta = _flatten_state(state)
    fd = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        up[i] += h
        down = theta.copy()
        down[i] -= h
        fd[i] = (
            total_loss(_unflatten_state(up, state), x, zt, labels, spec)
            - total_loss(_unflatten_state(down, state), x, zt, labels, spec)
        ) / (2.0 * h)
    denom = max(float(np.linalg.norm(fd)), 1e-12)
    return float(np.linalg.norm(analytic - fd)) / denom

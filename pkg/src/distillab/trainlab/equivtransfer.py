"""Inductive-bias transfer experiment machinery.

Teacher: a circular-convolution mixer over the patch grid, exactly
translation equivariant by construction. Student: single-head
self-attention with a learnable positional bias, trained either on the
task alone or on task + feature distillation through the standard
pipeline (linear projector, joint normalization, soft-maximum distance).
The measurement is mu_T over held-out token batches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynamics.probes import decorrelation, record_spectrum
from ..dynamics.trajectory import TrajectoryRecord
from ..equivariance import (
    CircularConvMixer,
    SelfAttentionMap,
    TokenBatch,
    mu_T_suite,
    unit_circular_shifts,
)
from ..errors import NumericError
from ..kdcore import DistanceSpec, NormScheme, distill_loss, linear_init, task_loss
from ..linalg import Rng
from .tasks import (
    DATA_STREAM,
    EVAL_STREAM,
    HEAD_STREAM,
    LABEL_STREAM,
    PROJECTOR_STREAM,
    STUDENT_STREAM,
    TEACHER_STREAM,
)


@dataclass(frozen=True)
class TokenTaskSpec:
    batch: int = 16
    channels: int = 8
    grid: int = 4
    prefix: int = 2
    n_classes: int = 4
    kernel_size: int = 3
    steps: int = 500
    learning_rate: float = 0.05
    distill_weight: float = 1.0
    norm: NormScheme = field(default_factory=lambda: NormScheme("batch"))
    distance: DistanceSpec = field(default_factory=lambda: DistanceSpec("logsum", alpha=4.0))
    record_every: int = 50
    eval_batches: int = 4

    @property
    def tokens(self) -> int:
        return self.prefix + self.grid * self.grid


def token_batch(rng: Rng, spec: TokenTaskSpec) -> TokenBatch:
    data = rng.normal(spec.batch, spec.tokens, spec.channels)
    return TokenBatch(data, spec.grid, spec.grid, spec.prefix)


def make_teacher(seed: int, spec: TokenTaskSpec) -> CircularConvMixer:
    return CircularConvMixer.create(
        Rng(seed, TEACHER_STREAM), spec.channels, spec.kernel_size
    )


@dataclass(frozen=True)
class TransferRun:
    suite: object               # mu_T SuiteReport for the trained student
    trajectory: TrajectoryRecord
    final_accuracy: float
    final_distill_loss: float


def transfer_run(spec: TokenTaskSpec, seed: int, distill: bool) -> TransferRun:
    """Train the attention student, with or without feature distillation,
    and score its translational equivariance on held-out batches."""
    teacher = make_teacher(seed, spec)
    label_head = Rng(seed, LABEL_STREAM).matrix(
        spec.channels, spec.n_classes, scale=1.0 / np.sqrt(spec.channels)
    )
    student = SelfAttentionMap.create(
        Rng(seed, STUDENT_STREAM), spec.channels, spec.tokens
    )
    head = Rng(seed, HEAD_STREAM).matrix(
        spec.channels, spec.n_classes, scale=1.0 / np.sqrt(spec.channels)
    )
    projector = linear_init(Rng(seed, PROJECTOR_STREAM), spec.channels, spec.channels)
    data_rng = Rng(seed, DATA_STREAM)
    record = TrajectoryRecord()
    lr = spec.learning_rate
    n_spatial = spec.grid * spec.grid

    def teacher_logits(x: TokenBatch) -> np.ndarray:
        pooled = teacher(x).spatial().mean(axis=1)
        return pooled @ label_head

    last = None
    for t in range(spec.steps):
        x = token_batch(data_rng, spec)
        labels = np.argmax(teacher_logits(x), axis=1)
        out, tape = student.forward_with_tape(x)
        pooled = out.spatial().mean(axis=1)
        t_loss, g_logits = task_loss(pooled @ head, labels)
        if not np.isfinite(t_loss):
            raise NumericError(f"token task loss diverged at step {t}")
        g_head = pooled.T @ g_logits
        g_pooled = g_logits @ head.T
        g_out = np.zeros_like(out.data)
        g_out[:, spec.prefix:, :] = g_pooled[:, None, :] / n_spatial

        d_loss = 0.0
        d_grads = None
        if distill:
            zs_flat = out.data.reshape(-1, spec.channels)
            zt_flat = teacher(x).data.reshape(-1, spec.channels)
            d_res = distill_loss(zs_flat, zt_flat, projector, spec.norm, spec.distance)
            d_loss = d_res.loss
            d_grads = d_res.grad_layers
            g_out += spec.distill_weight * d_res.grad_zs.reshape(out.data.shape)

        if t % spec.record_every == 0:
            flat_in = x.data.reshape(-1, spec.channels)
            flat_out = out.data.reshape(-1, spec.channels)
            record.append(t, t_loss + spec.distill_weight * d_loss,
                          decorrelation(flat_in, flat_out),
                          record_spectrum(projector))

        att_grads, _ = student.vjp(tape, g_out)
        student = student.replace(**{
            k: v - lr * att_grads[k] for k, v in student.params().items()
        })
        head = head - lr * g_head
        if d_grads is not None:
            projector = projector.with_layers(
                w - lr * spec.distill_weight * g for w, g in zip(projector.layers, d_grads)
            )
        last = (x, labels)

    x, labels = last
    out = student(x)
    pooled = out.spatial().mean(axis=1)
    t_loss, _ = task_loss(pooled @ head, labels)
    accuracy = float(np.mean(np.argmax(pooled @ head, axis=1) == labels))
    zs_flat = out.data.reshape(-1, spec.channels)
    zt_flat = teacher(x).data.reshape(-1, spec.channels)
    final_d = distill_loss(zs_flat, zt_flat, projector, spec.norm, spec.distance).loss
    record.append(spec.steps, t_loss + spec.distill_weight * (final_d if distill else 0.0),
                  decorrelation(x.data.reshape(-1, spec.channels), zs_flat),
                  record_spectrum(projector))

    eval_rng = Rng(seed, EVAL_STREAM)
    batches = [token_batch(eval_rng, spec) for _ in range(spec.eval_batches)]
    suite = mu_T_suite(student, batches, unit_circular_shifts())
    return TransferRun(suite, record, accuracy, final_d)

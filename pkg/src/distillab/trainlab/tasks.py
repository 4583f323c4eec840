"""Seeded synthetic distillation tasks.

Inputs are standard normal; a frozen random teacher network produces the
target representations, and labels come from the argmax of a frozen
linear readout of those representations. The teacher's output dimensions
carry a power-law scale profile (absorbed into its last layer), giving
its features a decaying per-dimension spectrum like a trained backbone;
without it every direction matters equally and normalization-dependent
rank effects have nothing to act on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import Matrix, Rng
from .nets import ToyNet

# Sub-stream tags of the per-seed RNG tree.
DATA_STREAM = 1
TEACHER_STREAM = 2
STUDENT_STREAM = 3
PROJECTOR_STREAM = 4
HEAD_STREAM = 5
EVAL_STREAM = 6
LABEL_STREAM = 7


@dataclass(frozen=True)
class SyntheticTask:
    seed: int
    input_dim: int
    teacher: ToyNet
    label_head: Matrix
    batch_size: int = 128

    @staticmethod
    def create(seed: int, input_dim: int, teacher_dim: int, teacher_hidden: int,
               teacher_depth: int = 2, n_classes: int = 8, batch_size: int = 128,
               feature_decay: float = 1.0) -> "SyntheticTask":
        rng = Rng(seed)
        dims = [input_dim] + [teacher_hidden] * (teacher_depth - 1) + [teacher_dim]
        teacher = ToyNet.create(rng.child(TEACHER_STREAM), dims)
        scales = (1.0 + np.arange(teacher_dim)) ** -feature_decay
        layers = list(teacher.layers)
        layers[-1] = layers[-1] * scales[None, :]
        for w in layers:
            w.setflags(write=False)
        label_head = rng.child(LABEL_STREAM).matrix(
            teacher_dim, n_classes, scale=1.0 / np.sqrt(teacher_dim)
        )
        # Labels should not hinge on the weakest (most downscaled) teacher
        # dimensions; undo the decay in the readout.
        label_head = label_head / scales[:, None]
        label_head.setflags(write=False)
        return SyntheticTask(seed, input_dim, ToyNet(layers), label_head, batch_size)

    @property
    def n_classes(self) -> int:
        return self.label_head.shape[1]

    def input_pool(self, count: int) -> Matrix:
        """First `count` samples of the seed's input stream; pools of
        different lengths share a common prefix, so batch-size arms see
        identical data in identical order."""
        return Rng(self.seed, DATA_STREAM).matrix(count, self.input_dim)

    def teacher_features(self, x: Matrix) -> Matrix:
        return self.teacher.forward(x)

    def labels(self, zt: Matrix) -> np.ndarray:
        return np.argmax(zt @ self.label_head, axis=1)

    def eval_set(self, count: int):
        x = Rng(self.seed, EVAL_STREAM).matrix(count, self.input_dim)
        zt = self.teacher_features(x)
        return x, zt, self.labels(zt)

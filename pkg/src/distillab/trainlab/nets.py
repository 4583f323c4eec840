"""Bias-free ReLU networks for desk-scale students and teachers."""

from __future__ import annotations

import numpy as np

from ..kdcore.projector import ProjectorState, project_vjp, project_with_tape
from ..linalg import Matrix, Rng


class ToyNet:
    """Stack of bias-free weight matrices with ReLU between (none after
    the last). Structurally identical to an MLP projector, so forward and
    backward delegate to the projector kernels."""

    def __init__(self, layers):
        self._state = ProjectorState.mlp(layers)

    @property
    def layers(self) -> tuple:
        return self._state.layers

    @property
    def input_dim(self) -> int:
        return self._state.input_dim

    @property
    def output_dim(self) -> int:
        return self._state.output_dim

    def forward(self, x: Matrix) -> Matrix:
        out, _ = project_with_tape(x, self._state)
        return out

    def forward_with_tape(self, x: Matrix):
        return project_with_tape(x, self._state)

    def vjp(self, tape, upstream: Matrix):
        return project_vjp(self._state, tape, upstream)

    def with_layers(self, layers) -> "ToyNet":
        return ToyNet(tuple(layers))

    @staticmethod
    def create(rng: Rng, dims) -> "ToyNet":
        """He-scaled Gaussian layers along the given dimension chain."""
        layers = [rng.matrix(dims[i], dims[i + 1], scale=np.sqrt(2.0 / dims[i]))
                  for i in range(len(dims) - 1)]
        return ToyNet(layers)

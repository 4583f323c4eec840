"""Projector weight dynamics: correlation matrices, the velocity field
Cst - Cs @ Wp, the discrete update with weight decay, and the whitened
moving-average equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError, ShapeError
from ..linalg import Matrix, as_matrix, frobenius_norm

# How far a stream's self-correlation may sit from the identity and still
# count as whitened.
WHITENED_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationPair:
    """Self correlation cs = Zs^T Zs and cross correlation cst = Zs^T Zt."""

    cs: Matrix
    cst: Matrix

    def __post_init__(self):
        cs = as_matrix(self.cs, "cs")
        cst = as_matrix(self.cst, "cst")
        if cs.shape[0] != cs.shape[1]:
            raise ShapeError(f"cs must be square, got {cs.shape}")
        if cst.shape[0] != cs.shape[0]:
            raise ShapeError(f"cst rows {cst.shape[0]} != cs dim {cs.shape[0]}")
        object.__setattr__(self, "cs", cs)
        object.__setattr__(self, "cst", cst)

    def validate(self, sym_tol: float = 1e-12, eig_tol: float = -1e-9) -> None:
        """Check symmetry and positive semidefiniteness of cs."""
        if frobenius_norm(self.cs - self.cs.T) > sym_tol:
            raise PreconditionError("cs is not symmetric")
        if float(np.linalg.eigvalsh(self.cs).min()) < eig_tol:
            raise PreconditionError("cs is not positive semidefinite")

    def is_whitened(self, tol: float = WHITENED_TOL) -> bool:
        return frobenius_norm(self.cs - np.eye(self.cs.shape[0])) <= tol


@dataclass(frozen=True)
class DynamicsConfig:
    learning_rate: float
    weight_decay: float = 0.0
    steps: int = 1
    record_every: int = 1

    def __post_init__(self):
        # learning_rate 0 is allowed as a frozen-control run even though a
        # meaningful simulation wants it positive.
        if self.learning_rate < 0.0:
            raise PreconditionError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.weight_decay < 0.0:
            raise PreconditionError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.steps < 1:
            raise PreconditionError(f"steps must be >= 1, got {self.steps}")
        if self.record_every < 1:
            raise PreconditionError(f"record_every must be >= 1, got {self.record_every}")


def correlations(zs: Matrix, zt: Matrix) -> CorrelationPair:
    zs = as_matrix(zs, "zs")
    zt = as_matrix(zt, "zt")
    if zs.shape[0] != zt.shape[0]:
        raise ShapeError(f"batch sizes differ: zs {zs.shape[0]} vs zt {zt.shape[0]}")
    return CorrelationPair(zs.T @ zs, zs.T @ zt)


def projector_velocity(c: CorrelationPair, wp: Matrix) -> Matrix:
    """cst - cs @ wp: the negative gradient of the half squared error."""
    wp = as_matrix(wp, "wp")
    if wp.shape != c.cst.shape:
        raise ShapeError(f"wp shape {wp.shape} != cst shape {c.cst.shape}")
    return c.cst - c.cs @ wp


def step(wp: Matrix, c: CorrelationPair, cfg: DynamicsConfig) -> Matrix:
    """(1 - weight_decay) * wp + learning_rate * velocity."""
    return (1.0 - cfg.weight_decay) * as_matrix(wp, "wp") \
        + cfg.learning_rate * projector_velocity(c, wp)


@dataclass(frozen=True)
class EmaResult:
    """Simulated weights vs the closed-form moving-average recurrence."""

    wp: Matrix
    recurrence: Matrix
    max_abs_gap: float


def ema_equivalence(pairs, cfg: DynamicsConfig, wp0: Matrix | None = None) -> EmaResult:
    """Run the update on a whitened batch stream and compare it with
    m[t+1] = (1 - weight_decay - learning_rate) * m[t] + learning_rate * cst[t].

    Requires weight_decay == learning_rate (the moving-average regime) and
    every cs in the stream to equal the identity within WHITENED_TOL.
    """
    if cfg.weight_decay != cfg.learning_rate:
        raise PreconditionError(
            "moving-average equivalence needs weight_decay == learning_rate, "
            f"got {cfg.weight_decay} vs {cfg.learning_rate}"
        )
    pairs = list(pairs)
    if not pairs:
        raise PreconditionError("empty correlation stream")
    wp = np.zeros_like(pairs[0].cst) if wp0 is None else as_matrix(wp0, "wp0").copy()
    m = wp.copy()
    keep = 1.0 - cfg.weight_decay - cfg.learning_rate
    max_gap = 0.0
    for i, pair in enumerate(pairs):
        if not pair.is_whitened():
            raise PreconditionError(f"stream element {i} is not whitened (cs != I)")
        wp = step(wp, pair, cfg)
        m = keep * m + cfg.learning_rate * pair.cst
        max_gap = max(max_gap, float(np.max(np.abs(wp - m))))
    return EmaResult(wp, m, max_gap)

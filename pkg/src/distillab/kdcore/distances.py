"""Distance functions between feature batches, with analytic gradients.

frobenius is the plain half squared error. logsum is a soft maximum:
log of the sum of alpha-powered absolute residuals, which downweights
already-close entries. logsumexp is the temperature-tau variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError, ShapeError
from ..linalg import Matrix, as_matrix

DISTANCE_KINDS = ("frobenius", "logsum", "logsumexp")


@dataclass(frozen=True)
class DistanceSpec:
    kind: str = "frobenius"
    alpha: float = 4.0
    tau: float = 1.0
    floor: float = 1e-12

    def __post_init__(self):
        if self.kind not in DISTANCE_KINDS:
            raise PreconditionError(f"unknown distance kind {self.kind!r}")
        if not self.alpha > 0.0:
            raise PreconditionError(f"alpha must be > 0, got {self.alpha}")
        if not self.tau > 0.0:
            raise PreconditionError(f"tau must be > 0, got {self.tau}")
        if not self.floor > 0.0:
            raise PreconditionError(f"floor must be > 0, got {self.floor}")


def _residual(a: Matrix, b: Matrix) -> Matrix:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"distance shape mismatch: {a.shape} vs {b.shape}")
    return a - b


def _abs_pow(r_abs: Matrix, power: float, floor: float) -> Matrix:
    # |r|^power via exp(power * ln|r|); entries below the floor contribute 0,
    # which avoids ln(0) and pins the r = 0 singularity of fractional powers.
    out = np.zeros_like(r_abs)
    mask = r_abs >= floor
    if np.any(mask):
        out[mask] = np.exp(power * np.log(r_abs[mask]))
    return out


def distance(a: Matrix, b: Matrix, spec: DistanceSpec) -> float:
    r = _residual(a, b)
    if spec.kind == "frobenius":
        return 0.5 * float(np.sum(r * r))
    r_abs = np.abs(r)
    if spec.kind == "logsum":
        return float(np.log(np.sum(_abs_pow(r_abs, spec.alpha, spec.floor)) + spec.floor))
    # logsumexp with max subtraction for stability
    m = float(r_abs.max())
    return m + spec.tau * float(np.log(np.sum(np.exp((r_abs - m) / spec.tau))))


def distance_grad(a: Matrix, b: Matrix, spec: DistanceSpec) -> Matrix:
    """dD/da; sign(0) = 0 throughout."""
    r = _residual(a, b)
    if spec.kind == "frobenius":
        return r
    r_abs = np.abs(r)
    sign = np.sign(r)
    if spec.kind == "logsum":
        denom = float(np.sum(_abs_pow(r_abs, spec.alpha, spec.floor))) + spec.floor
        return spec.alpha * _abs_pow(r_abs, spec.alpha - 1.0, spec.floor) * sign / denom
    m = float(r_abs.max())
    w = np.exp((r_abs - m) / spec.tau)
    return w * sign / float(np.sum(w))

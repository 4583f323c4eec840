"""Rank-constrained projector loss vs the SVD-truncation optimum.

For whitened student features (Zs^T Zs = I) the minimum of
0.5 * ||Zs Wp - Zt||_F^2 over rank-<=r Wp is reached at the truncated SVD
of Cst = Zs^T Zt, with value 0.5 * (||Zt||^2 - sum of the top-r squared
singular values). The constrained route optimizes a factored Wp = A @ B
by gradient descent and reports both numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError, PreconditionError
from ..linalg import Matrix, Rng, as_matrix, frobenius_norm, svd
from .updates import WHITENED_TOL

RESTARTS = 10
LEARNING_RATE = 0.05
GRAD_TOL = 1e-10
MAX_STEPS = 50_000
INIT_SCALE = 0.1


@dataclass(frozen=True)
class LowRankGap:
    constrained_loss: float
    oracle_loss: float
    weights: Matrix  # best rank-constrained projector found


def low_rank_gap(zs: Matrix, zt: Matrix, r: int, rng: Rng | None = None,
                 restarts: int = RESTARTS, learning_rate: float = LEARNING_RATE,
                 grad_tol: float = GRAD_TOL, max_steps: int = MAX_STEPS) -> LowRankGap:
    zs = as_matrix(zs, "zs")
    zt = as_matrix(zt, "zt")
    ds = zs.shape[1]
    dt = zt.shape[1]
    if frobenius_norm(zs.T @ zs - np.eye(ds)) > WHITENED_TOL:
        raise PreconditionError("zs is not whitened (zs^T zs != I)")
    if not 1 <= r <= min(ds, dt):
        raise InputError(f"rank {r} outside [1, {min(ds, dt)}]")
    if rng is None:
        rng = Rng(0)

    cst = zs.T @ zt
    zt_sq = float(np.sum(zt * zt))
    sigma = svd(cst).singular_values
    oracle_loss = 0.5 * (zt_sq - float(np.sum(sigma[:r] ** 2)))

    # All restarts advance in lockstep; a converged restart just idles at
    # its minimum. Whitening lets the iteration live in Cst space:
    # 0.5 * ||Zs A B - Zt||^2 = 0.5 * (||A B - Cst||^2 + ||Zt||^2 - ||Cst||^2).
    a = np.stack([rng.matrix(ds, r, scale=INIT_SCALE) for _ in range(restarts)])
    b = np.stack([rng.matrix(r, dt, scale=INIT_SCALE) for _ in range(restarts)])
    for _ in range(max_steps):
        resid = a @ b - cst
        ga = resid @ np.transpose(b, (0, 2, 1))
        gb = np.transpose(a, (0, 2, 1)) @ resid
        gnorm = np.sqrt(np.sum(ga * ga, axis=(1, 2)) + np.sum(gb * gb, axis=(1, 2)))
        if float(gnorm.max()) < grad_tol:
            break
        a = a - learning_rate * ga
        b = b - learning_rate * gb

    losses = [0.5 * float(np.sum((zs @ (a[i] @ b[i]) - zt) ** 2)) for i in range(restarts)]
    best = int(np.argmin(losses))
    return LowRankGap(losses[best], oracle_loss, a[best] @ b[best])

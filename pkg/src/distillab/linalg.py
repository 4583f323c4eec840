"""Dense linear algebra and statistics kernel.

Matrices are 2-D row-major float64 numpy arrays throughout. Every public
operation validates that its inputs are finite and returns finite output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError, PreconditionError, ShapeError

Matrix = np.ndarray

# One-sided Jacobi settings: desk-scale sizes, accuracy over asymptotics.
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12

# Below this (biased) variance a vector is treated as constant.
VARIANCE_FLOOR = 1e-24

_MASK64 = (1 << 64) - 1


def as_matrix(a, name: str = "matrix") -> Matrix:
    """Coerce to a C-contiguous 2-D float64 array, checking finiteness."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise InputError(f"{name} contains non-finite entries")
    return m


def check_finite(m: Matrix, name: str = "result") -> Matrix:
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{name} contains non-finite entries")
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product a @ b with shape validation."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul shapes do not conform: {a.shape[0]}x{a.shape[1]} @ "
            f"{b.shape[0]}x{b.shape[1]}"
        )
    return check_finite(a @ b, "matmul result")


def frobenius_norm(m: Matrix) -> float:
    return float(np.sqrt(np.sum(np.asarray(m, dtype=np.float64) ** 2)))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD: u @ diag(singular_values) @ vt reconstructs the input.

    singular_values is non-increasing and non-negative; the columns of
    left_vectors and right_vectors are orthonormal.
    """

    singular_values: np.ndarray
    left_vectors: Matrix
    right_vectors: Matrix

    def reconstruct(self) -> Matrix:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def svd(m: Matrix) -> SvdResult:
    """One-sided Jacobi SVD, singular values sorted descending.

    Cyclic sweeps rotate column pairs until all pairwise column dot
    products are below JACOBI_TOL relative to the column norms. Raises
    NumericError if JACOBI_MAX_SWEEPS sweeps do not converge.
    """
    a = as_matrix(m)
    if a.size == 0:
        raise ShapeError(f"svd of empty matrix {a.shape}")
    if a.shape[0] < a.shape[1]:
        r = svd(a.T)
        return SvdResult(r.singular_values, r.right_vectors, r.left_vectors)

    rows, cols = a.shape
    work = a.copy()
    v = np.eye(cols)

    converged = False
    worst = 0.0
    for _ in range(JACOBI_MAX_SWEEPS):
        worst = 0.0
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                cp = work[:, p]
                cq = work[:, q]
                app = float(cp @ cp)
                aqq = float(cq @ cq)
                apq = float(cp @ cq)
                if app == 0.0 or aqq == 0.0:
                    continue
                rel = abs(apq) / np.sqrt(app * aqq)
                worst = max(worst, rel)
                if rel <= JACOBI_TOL:
                    continue
                # Jacobi rotation zeroing the (p, q) column dot product.
                zeta = (aqq - app) / (2.0 * apq)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c * cp - s * cq
                new_q = s * cp + c * cq
                work[:, p] = new_p
                work[:, q] = new_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if worst <= JACOBI_TOL:
            converged = True
            break
    if not converged:
        raise NumericError(
            f"Jacobi SVD did not converge within {JACOBI_MAX_SWEEPS} sweeps; "
            f"max relative off-diagonal residual {worst:.3e}"
        )

    norms = np.sqrt(np.sum(work * work, axis=0))
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    work = work[:, order]
    v = v[:, order]

    u = np.zeros((rows, cols))
    smax = sigma[0] if cols else 0.0
    # Columns at roundoff level carry no usable direction; rebuild them
    # by orthonormal completion so u stays orthonormal.
    tiny = smax * max(rows, cols) * np.finfo(np.float64).eps * 16.0
    degenerate = []
    for j in range(cols):
        if sigma[j] > tiny and sigma[j] > 0.0:
            u[:, j] = work[:, j] / sigma[j]
        else:
            degenerate.append(j)
    _complete_orthonormal(u, degenerate)
    return SvdResult(sigma, u, v)


def _complete_orthonormal(u: Matrix, empty_cols: list[int]) -> None:
    # Fill the listed columns with unit vectors orthogonal to all others,
    # drawn from the standard basis (Gram-Schmidt, in place).
    if not empty_cols:
        return
    rows = u.shape[0]
    filled = [j for j in range(u.shape[1]) if j not in empty_cols]
    basis = [u[:, j].copy() for j in filled]
    for j in empty_cols:
        for k in range(rows):
            cand = np.zeros(rows)
            cand[k] = 1.0
            for b in basis:
                cand -= (cand @ b) * b
            norm = np.sqrt(cand @ cand)
            if norm > 0.5:
                cand /= norm
                u[:, j] = cand
                basis.append(cand)
                break
        else:
            raise NumericError("orthonormal completion failed")


def numerical_rank(m: Matrix, rel_tol: float) -> int:
    """Number of singular values above rel_tol * sigma_max; 0 for the zero matrix."""
    if not (0.0 < rel_tol < 1.0):
        raise InputError(f"rel_tol must be in (0, 1), got {rel_tol}")
    sigma = svd(m).singular_values
    smax = float(sigma[0]) if sigma.size else 0.0
    if smax == 0.0:
        return 0
    return int(np.sum(sigma > rel_tol * smax))


def pearson(x, y) -> float:
    """Pearson correlation in [-1, 1]; 0 when either vector is (near) constant."""
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    if xv.shape != yv.shape:
        raise ShapeError(f"pearson length mismatch: {xv.size} vs {yv.size}")
    if xv.size < 2:
        raise PreconditionError(f"pearson needs length >= 2, got {xv.size}")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    vx = float(np.mean(xc * xc))
    vy = float(np.mean(yc * yc))
    if vx < VARIANCE_FLOOR or vy < VARIANCE_FLOOR:
        return 0.0
    r = float(np.mean(xc * yc) / np.sqrt(vx * vy))
    return float(np.clip(r, -1.0, 1.0))


class Rng:
    """Deterministic random source backed by numpy's Philox 4x64 generator.

    Philox is a counter-based generator with a documented, platform-stable
    stream: identical (seed, stream) pairs produce bitwise-identical values
    everywhere. Sub-streams (stream >= 1) are independent of the root and
    of each other because the 128-bit Philox key is (seed, stream).
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = self.seed + (self.stream << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> "Rng":
        """Independent sub-stream; stream 0 is reserved for the root."""
        if stream < 1:
            raise InputError("child stream index must be >= 1")
        return Rng(self.seed, stream)

    def normal(self, *shape: int, scale: float = 1.0) -> np.ndarray:
        return self._gen.standard_normal(shape) * scale

    def matrix(self, rows: int, cols: int, scale: float = 1.0) -> Matrix:
        return np.ascontiguousarray(self.normal(rows, cols, scale=scale))

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size=size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def orthonormal_columns(self, rows: int, cols: int) -> Matrix:
        """rows x cols matrix with exactly orthonormal columns (rows >= cols)."""
        if rows < cols:
            raise ShapeError(f"need rows >= cols, got {rows}x{cols}")
        q, r = np.linalg.qr(self.matrix(rows, cols))
        # Fix the sign convention so the factorization is unique.
        signs = np.sign(np.diag(r))
        signs[signs == 0.0] = 1.0
        return np.ascontiguousarray(q * signs)

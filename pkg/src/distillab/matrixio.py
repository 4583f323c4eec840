"""Matrix serialization: CSV and a framed little-endian binary layout.

CSV: one row per line, entries formatted with %.17g (lossless for float64).
Binary: u64 rows, u64 cols, then rows*cols little-endian f64 in row-major
order. The binary form is what the CLI uses for checkpoints.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InputError
from .linalg import Matrix, as_matrix

_HEADER = struct.Struct("<QQ")


def matrix_to_csv(m: Matrix) -> str:
    m = as_matrix(m)
    return "\n".join(",".join(f"{v:.17g}" for v in row) for row in m) + "\n"


def save_matrix_csv(m: Matrix, path) -> None:
    Path(path).write_text(matrix_to_csv(m))


def load_matrix_csv(path) -> Matrix:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise InputError(f"no matrix rows in {path}")
    return as_matrix(rows, str(path))


def matrix_to_bytes(m: Matrix) -> bytes:
    m = as_matrix(m)
    return _HEADER.pack(m.shape[0], m.shape[1]) + m.astype("<f8").tobytes()


def matrix_from_bytes(buf: bytes, name: str = "buffer") -> Matrix:
    if len(buf) < _HEADER.size:
        raise InputError(f"{name}: truncated matrix header")
    rows, cols = _HEADER.unpack_from(buf)
    expected = _HEADER.size + rows * cols * 8
    if len(buf) != expected:
        raise InputError(
            f"{name}: expected {expected} bytes for {rows}x{cols}, got {len(buf)}"
        )
    data = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    return as_matrix(data.reshape(rows, cols), name)


def save_matrix_bin(m: Matrix, path) -> None:
    Path(path).write_bytes(matrix_to_bytes(m))


def load_matrix_bin(path) -> Matrix:
    return matrix_from_bytes(Path(path).read_bytes(), str(path))

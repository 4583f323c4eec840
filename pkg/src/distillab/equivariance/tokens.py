"""Token batches, the token<->patch-grid roll, and spatial translations.

A token batch is B x N x C with `prefix` non-spatial tokens (class /
distillation style) at the front of the sequence; the remaining
grid_h * grid_w tokens unroll from the patch grid in row-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError, PreconditionError, ShapeError

TRANSLATION_MODES = ("circular", "zero_pad")

_TOKEN_HEADER = struct.Struct("<QQQQQQ")


@dataclass(frozen=True)
class TokenBatch:
    """B x N x C float64 token tensor plus its spatial layout."""

    data: np.ndarray
    grid_h: int
    grid_w: int
    prefix: int = 2

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ShapeError(f"token data must be B x N x C, got ndim={data.ndim}")
        if not np.all(np.isfinite(data)):
            raise InputError("token data contains non-finite entries")
        if self.prefix < 0 or self.grid_h < 1 or self.grid_w < 1:
            raise PreconditionError(
                f"bad layout: prefix={self.prefix}, grid={self.grid_h}x{self.grid_w}"
            )
        if data.shape[1] != self.prefix + self.grid_h * self.grid_w:
            raise ShapeError(
                f"N={data.shape[1]} != prefix {self.prefix} + "
                f"{self.grid_h}x{self.grid_w} grid"
            )
        object.__setattr__(self, "data", data)

    @property
    def b(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def c(self) -> int:
        return self.data.shape[2]

    def spatial(self) -> np.ndarray:
        return self.data[:, self.prefix:, :]

    def prefix_slab(self) -> np.ndarray:
        return self.data[:, : self.prefix, :]

    def with_data(self, data: np.ndarray) -> "TokenBatch":
        return TokenBatch(data, self.grid_h, self.grid_w, self.prefix)

    def with_spatial(self, spatial: np.ndarray) -> "TokenBatch":
        """Replace the spatial tokens, keeping the prefix slab."""
        return self.with_data(
            np.concatenate([self.prefix_slab(), spatial], axis=1)
        )


@dataclass(frozen=True)
class Translation:
    """Patch-unit shift; positive dy/dx move content toward higher indices."""

    dy: int
    dx: int
    mode: str = "circular"

    def __post_init__(self):
        if self.mode not in TRANSLATION_MODES:
            raise InputError(f"unknown translation mode {self.mode!r}")

    def inverse(self) -> "Translation":
        return Translation(-self.dy, -self.dx, self.mode)


def roll_to_grid(x: TokenBatch) -> tuple[np.ndarray, np.ndarray]:
    """Spatial tokens as a B x C x H x W grid (row-major), prefix alongside."""
    grid = np.transpose(x.spatial(), (0, 2, 1)).reshape(
        x.b, x.c, x.grid_h, x.grid_w
    )
    return np.ascontiguousarray(grid), x.prefix_slab()


def unroll_grid(grid: np.ndarray) -> np.ndarray:
    """Inverse of roll_to_grid: B x C x H x W back to B x (H*W) x C tokens."""
    b, c = grid.shape[0], grid.shape[1]
    return np.ascontiguousarray(np.transpose(grid.reshape(b, c, -1), (0, 2, 1)))


def translate_grid(grid: np.ndarray, t: Translation) -> np.ndarray:
    """Shift a B x C x H x W grid; circular wraps, zero_pad zero-fills."""
    h, w = grid.shape[2], grid.shape[3]
    if abs(t.dy) >= h or abs(t.dx) >= w:
        raise InputError(
            f"shift ({t.dy}, {t.dx}) out of range for {h}x{w} grid"
        )
    if t.mode == "circular":
        return np.roll(grid, (t.dy, t.dx), axis=(2, 3))
    out = np.zeros_like(grid)
    ys_dst = slice(max(0, t.dy), h + min(0, t.dy))
    xs_dst = slice(max(0, t.dx), w + min(0, t.dx))
    ys_src = slice(max(0, -t.dy), h + min(0, -t.dy))
    xs_src = slice(max(0, -t.dx), w + min(0, -t.dx))
    out[:, :, ys_dst, xs_dst] = grid[:, :, ys_src, xs_src]
    return out


def translate_tokens(x: TokenBatch, t: Translation) -> TokenBatch:
    """The operator T on token batches: translate spatial tokens, keep prefix."""
    grid, _ = roll_to_grid(x)
    return x.with_spatial(unroll_grid(translate_grid(grid, t)))


def save_token_batch(x: TokenBatch, path) -> None:
    """Framed binary: u64 B,N,C,prefix,H,W then B*N*C little-endian f64."""
    header = _TOKEN_HEADER.pack(x.b, x.n, x.c, x.prefix, x.grid_h, x.grid_w)
    Path(path).write_bytes(header + x.data.astype("<f8").tobytes())


def load_token_batch(path) -> TokenBatch:
    buf = Path(path).read_bytes()
    if len(buf) < _TOKEN_HEADER.size:
        raise InputError(f"{path}: truncated token batch header")
    b, n, c, prefix, h, w = _TOKEN_HEADER.unpack_from(buf)
    expected = _TOKEN_HEADER.size + b * n * c * 8
    if len(buf) != expected:
        raise InputError(f"{path}: expected {expected} bytes, got {len(buf)}")
    data = np.frombuffer(buf, dtype="<f8", offset=_TOKEN_HEADER.size)
    return TokenBatch(data.reshape(b, n, c), int(h), int(w), int(prefix))

"""Concrete token maps: identity, shared per-token MLP, single-head
self-attention with an additive positional bias, and a circular
convolution mixer (exactly translation equivariant, used as a teacher).

Every map preserves the B x N x C shape. The attention map also exposes
a hand-derived backward pass so it can be trained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from ..linalg import Rng
from .tokens import TokenBatch, roll_to_grid, unroll_grid


class TokenMap:
    """Callable TokenBatch -> TokenBatch preserving shape."""

    name = "token_map"

    def __call__(self, x: TokenBatch) -> TokenBatch:
        raise NotImplementedError


class IdentityMap(TokenMap):
    name = "identity"

    def __call__(self, x: TokenBatch) -> TokenBatch:
        return x


class TokenwiseMlp(TokenMap):
    """Shared-weight MLP applied to each token independently (ReLU between
    layers, none after the last). No cross-token mixing, so it commutes
    with any token permutation."""

    name = "tokenwise_mlp"

    def __init__(self, layers):
        self.layers = [np.ascontiguousarray(w, dtype=np.float64) for w in layers]
        if self.layers[0].shape[0] != self.layers[-1].shape[1]:
            raise ShapeError("tokenwise MLP must map C back to C")

    @staticmethod
    def create(rng: Rng, channels: int, hidden: int, depth: int = 2) -> "TokenwiseMlp":
        dims = [channels] + [hidden] * (depth - 1) + [channels]
        layers = [rng.matrix(dims[i], dims[i + 1], scale=np.sqrt(2.0 / dims[i]))
                  for i in range(depth)]
        return TokenwiseMlp(layers)

    def __call__(self, x: TokenBatch) -> TokenBatch:
        h = x.data.reshape(-1, x.c)
        for i, w in enumerate(self.layers):
            h = h @ w
            if i < len(self.layers) - 1:
                h = np.maximum(h, 0.0)
        return x.with_data(h.reshape(x.b, x.n, x.c))


class SelfAttentionMap(TokenMap):
    """Single-head self-attention with a learnable additive positional bias.

    y = softmax(Q K^T / sqrt(C) + P) @ (X Wv) with Q = X Wq, K = X Wk.
    The positional bias P is N x N and shared across the batch.
    """

    name = "self_attention"

    def __init__(self, wq, wk, wv, pos_bias):
        self.wq = np.ascontiguousarray(wq, dtype=np.float64)
        self.wk = np.ascontiguousarray(wk, dtype=np.float64)
        self.wv = np.ascontiguousarray(wv, dtype=np.float64)
        self.pos_bias = np.ascontiguousarray(pos_bias, dtype=np.float64)

    @staticmethod
    def create(rng: Rng, channels: int, tokens: int,
               weight_scale: float = 0.3, bias_scale: float = 1.0) -> "SelfAttentionMap":
        return SelfAttentionMap(
            rng.matrix(channels, channels, scale=weight_scale / np.sqrt(channels)),
            rng.matrix(channels, channels, scale=weight_scale / np.sqrt(channels)),
            rng.matrix(channels, channels, scale=1.0 / np.sqrt(channels)),
            rng.matrix(tokens, tokens, scale=bias_scale),
        )

    def params(self) -> dict:
        return {"wq": self.wq, "wk": self.wk, "wv": self.wv, "pos_bias": self.pos_bias}

    def replace(self, **updates) -> "SelfAttentionMap":
        p = self.params() | updates
        return SelfAttentionMap(p["wq"], p["wk"], p["wv"], p["pos_bias"])

    def forward_with_tape(self, x: TokenBatch):
        data = x.data
        if self.pos_bias.shape[0] != x.n:
            raise ShapeError(
                f"positional bias is {self.pos_bias.shape[0]} tokens, batch has {x.n}"
            )
        scale = 1.0 / np.sqrt(x.c)
        q = data @ self.wq
        k = data @ self.wk
        v = data @ self.wv
        scores = q @ np.transpose(k, (0, 2, 1)) * scale + self.pos_bias
        scores -= scores.max(axis=2, keepdims=True)
        e = np.exp(scores)
        attn = e / e.sum(axis=2, keepdims=True)
        out = attn @ v
        tape = (data, q, k, v, attn, scale)
        return x.with_data(out), tape

    def __call__(self, x: TokenBatch) -> TokenBatch:
        out, _ = self.forward_with_tape(x)
        return out

    def vjp(self, tape, upstream: np.ndarray):
        """Gradients of sum(upstream * forward(x)) w.r.t. params and input."""
        data, q, k, v, attn, scale = tape
        d_attn = upstream @ np.transpose(v, (0, 2, 1))
        d_v = np.transpose(attn, (0, 2, 1)) @ upstream
        # softmax backward, rowwise over the key axis
        d_scores = attn * (d_attn - np.sum(d_attn * attn, axis=2, keepdims=True))
        d_pos = d_scores.sum(axis=0)
        d_q = d_scores @ k * scale
        d_k = np.transpose(d_scores, (0, 2, 1)) @ q * scale
        grads = {
            "wq": np.einsum("bnc,bnd->cd", data, d_q),
            "wk": np.einsum("bnc,bnd->cd", data, d_k),
            "wv": np.einsum("bnc,bnd->cd", data, d_v),
            "pos_bias": d_pos,
        }
        d_x = d_q @ self.wq.T + d_k @ self.wk.T + d_v @ self.wv.T
        return grads, d_x


class CircularConvMixer(TokenMap):
    """Depthwise circular k x k convolution over the patch grid followed by
    a pointwise channel mix; prefix tokens pass through untouched.

    Circular shifts commute with this map exactly, so it is an exactly
    translation-equivariant teacher.
    """

    name = "circular_conv_mixer"

    def __init__(self, kernels, channel_mix):
        self.kernels = np.ascontiguousarray(kernels, dtype=np.float64)  # C x k x k
        self.channel_mix = np.ascontiguousarray(channel_mix, dtype=np.float64)
        if self.kernels.shape[0] != self.channel_mix.shape[0]:
            raise ShapeError("kernel channel count != channel mix dim")

    @staticmethod
    def create(rng: Rng, channels: int, kernel_size: int = 3) -> "CircularConvMixer":
        kernels = rng.normal(channels, kernel_size, kernel_size,
                             scale=1.0 / kernel_size)
        mix = rng.matrix(channels, channels, scale=1.0 / np.sqrt(channels))
        return CircularConvMixer(kernels, mix)

    def __call__(self, x: TokenBatch) -> TokenBatch:
        grid, _ = roll_to_grid(x)
        ksize = self.kernels.shape[1]
        center = ksize // 2
        mixed = np.zeros_like(grid)
        for i in range(ksize):
            for j in range(ksize):
                shifted = np.roll(grid, (i - center, j - center), axis=(2, 3))
                mixed += shifted * self.kernels[None, :, i, j, None, None]
        mixed = np.einsum("bchw,cd->bdhw", mixed, self.channel_mix)
        return x.with_spatial(unroll_grid(mixed))

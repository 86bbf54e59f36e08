"""Prompt encoding, attention pooling, conditioned decoding and heads.

Annotated points become class-aware tokens (2-D sinusoidal position plus a
learnable class embedding, layer-normalized). A fixed set of latent slots
cross-attends to the tokens, yielding a constant-size context regardless of
how many points a patch holds (possibly none). The decoder then lets every
spatial position of the fused features attend to that context; two residual
blocks with zero-initialized output projections keep it an identity map at
initialization.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Module, Parameter, Tensor
from ..errors import ConfigurationError


def point_position_embedding(rows, cols, height: int, width: int,
                             dim: int) -> np.ndarray:
    """2-D sinusoidal embedding of pixel coordinates, normalized to the patch.

    Half the dimensions encode row/height, half col/width, at integer spatial
    frequencies of the normalized coordinate in [0, 1).
    """
    if dim % 4 != 0:
        raise ConfigurationError(f"position embedding dim {dim} must be divisible by 4")
    rows = np.asarray(rows, dtype=np.float64)
    cols = np.asarray(cols, dtype=np.float64)
    u = (rows / height)[:, None]
    v = (cols / width)[:, None]
    n_freq = dim // 4
    freqs = 2.0 * np.pi * np.arange(1, n_freq + 1, dtype=np.float64)[None, :]
    return np.concatenate([np.sin(freqs * u), np.cos(freqs * u),
                           np.sin(freqs * v), np.cos(freqs * v)], axis=1)


class PointTokenEncoder(Module):
    """q_i = LayerNorm(position_embedding(p_i) + class_embedding(l_i))."""

    def __init__(self, rng: np.random.Generator, class_count: int, dim: int,
                 dtype=np.float32):
        super().__init__()
        self.class_table = Parameter(ad.glorot_uniform(
            rng, (class_count, dim), class_count, dim, dtype))
        self.ln_gain = Parameter(np.ones(dim, dtype=dtype))
        self.ln_offset = Parameter(np.zeros(dim, dtype=dtype))
        self.dim = dim
        self.dtype = dtype

    def forward(self, rows, cols, classes, height: int, width: int) -> Tensor:
        """One token per annotated point; empty input yields an empty (0, D) tensor."""
        if len(rows) == 0:
            return Tensor(np.zeros((0, self.dim), dtype=self.dtype))
        pos = Tensor(point_position_embedding(rows, cols, height, width,
                                              self.dim).astype(self.dtype))
        cls = ad.embedding(self.class_table.tensor, np.asarray(classes))
        return ad.layer_norm(ad.add(pos, cls), self.ln_gain.tensor,
                             self.ln_offset.tensor)


class AttentionPool(Module):
    """Fixed-length context: learnable latent slots cross-attend to the tokens."""

    def __init__(self, rng: np.random.Generator, dim: int, slots: int,
                 dtype=np.float32):
        super().__init__()
        self.latents = Parameter(ad.glorot_uniform(rng, (slots, dim), slots, dim, dtype))
        self.wk = Parameter(ad.glorot_uniform(rng, (dim, dim), dim, dim, dtype))
        self.wv = Parameter(ad.glorot_uniform(rng, (dim, dim), dim, dim, dtype))
        self.wo = Parameter(ad.glorot_uniform(rng, (dim, dim), dim, dim, dtype))
        self.dim = dim

    def forward(self, tokens: Tensor) -> Tensor:
        """(N, D) tokens -> (M, D) context; with no tokens the latents pass through."""
        if tokens.shape[0] == 0:
            return ad.dense(self.latents.tensor, self.wo.tensor)
        keys = ad.dense(tokens, self.wk.tensor)
        vals = ad.dense(tokens, self.wv.tensor)
        logits = ad.mul(ad.matmul(self.latents.tensor, ad.transpose(keys, (1, 0))),
                        1.0 / np.sqrt(self.dim))
        alpha = ad.softmax(logits, axis=-1)
        return ad.dense(ad.matmul(alpha, vals), self.wo.tensor)


class CrossAttentionBlock(Module):
    """Pre-LN cross-attention to the context plus an MLP, both residual."""

    def __init__(self, rng: np.random.Generator, dim: int, hidden: int,
                 dtype=np.float32):
        super().__init__()
        self.ln1_gain = Parameter(np.ones(dim, dtype=dtype))
        self.ln1_offset = Parameter(np.zeros(dim, dtype=dtype))
        self.wq = Parameter(ad.glorot_uniform(rng, (dim, dim), dim, dim, dtype))
        self.wk = Parameter(ad.glorot_uniform(rng, (dim, dim), dim, dim, dtype))
        self.wv = Parameter(ad.glorot_uniform(rng, (dim, dim), dim, dim, dtype))
        self.wo = Parameter(np.zeros((dim, dim), dtype=dtype))
        self.ln2_gain = Parameter(np.ones(dim, dtype=dtype))
        self.ln2_offset = Parameter(np.zeros(dim, dtype=dtype))
        w1, b1 = ad.dense_init(rng, dim, hidden, dtype)
        self.mlp_w1 = Parameter(w1)
        self.mlp_b1 = Parameter(b1)
        self.mlp_w2 = Parameter(np.zeros((hidden, dim), dtype=dtype))
        self.mlp_b2 = Parameter(np.zeros(dim, dtype=dtype))
        self.dim = dim

    def forward(self, x: Tensor, context: Tensor) -> Tensor:
        q = ad.dense(ad.layer_norm(x, self.ln1_gain.tensor, self.ln1_offset.tensor),
                     self.wq.tensor)
        k = ad.dense(context, self.wk.tensor)
        v = ad.dense(context, self.wv.tensor)
        logits = ad.mul(ad.matmul(q, ad.transpose(k, (1, 0))), 1.0 / np.sqrt(self.dim))
        attn = ad.matmul(ad.softmax(logits, axis=-1), v)
        x = ad.add(x, ad.dense(attn, self.wo.tensor))
        m = ad.layer_norm(x, self.ln2_gain.tensor, self.ln2_offset.tensor)
        m = ad.dense(ad.relu(ad.dense(m, self.mlp_w1.tensor, self.mlp_b1.tensor)),
                     self.mlp_w2.tensor, self.mlp_b2.tensor)
        return ad.add(x, m)


class PredictionHead(Module):
    """1x1 convolution (a dense map over channels) producing class logits."""

    def __init__(self, rng: np.random.Generator, dim: int, class_count: int,
                 dtype=np.float32):
        super().__init__()
        w, b = ad.dense_init(rng, dim, class_count, dtype)
        self.weight = Parameter(w)
        self.bias = Parameter(b)

    def forward(self, x: Tensor) -> Tensor:
        return ad.dense(x, self.weight.tensor, self.bias.tensor)


def upsample_probabilities(logits_grid: Tensor, out_hw: tuple[int, int]) -> Tensor:
    """Bilinearly upsample logits to pixel resolution, then softmax per pixel."""
    up = ad.bilinear_upsample(logits_grid, out_hw)
    return ad.softmax(up, axis=-1)

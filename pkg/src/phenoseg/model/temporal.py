"""Dynamic temporal aggregation.

Per spatial position, the feature sequence is split into a learnable low-pass
trend (depthwise temporal smoothing, moving-average initialized) and its
residual. A GRU compresses the trend into a single embedding; multi-head
attention with learnable queries pools the residual into event features; the
two are concatenated.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Module, Parameter, Tensor
from ..errors import ConfigurationError


def time_embedding(timestamps, dim: int) -> np.ndarray:
    """Sinusoidal embedding of integer timestamps, shape (T, dim).

    Component 2i is sin(t / 10000^(2i/dim)), component 2i+1 the matching cos.
    """
    if dim % 2 != 0:
        raise ConfigurationError(f"time embedding dim {dim} must be even")
    t = np.asarray(timestamps, dtype=np.float64).reshape(-1, 1)
    i2 = np.arange(0, dim, 2, dtype=np.float64)
    angles = t / np.power(10000.0, i2 / dim)
    out = np.zeros((t.shape[0], dim))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def clamp_kernel_size(requested: int, frames: int) -> int:
    """Largest odd kernel size <= min(requested, frames)."""
    k = min(requested, frames)
    if k % 2 == 0:
        k -= 1
    return max(k, 1)


class TrendExtractor(Module):
    """Learnable temporal smoothing; residual carries the transient events."""

    def __init__(self, channels: int, kernel_size: int, dtype=np.float32):
        super().__init__()
        if kernel_size % 2 == 0:
            raise ConfigurationError(f"trend kernel {kernel_size} must be odd")
        init = np.full((kernel_size, channels), 1.0 / kernel_size, dtype=dtype)
        self.kernel = Parameter(init)

    def decompose(self, seq: Tensor) -> tuple[Tensor, Tensor]:
        """Split (..., T, D) into (trend, residual); the parts sum to the input."""
        trend = ad.depthwise_conv1d(seq, self.kernel.tensor)
        high = ad.sub(seq, trend)
        return trend, high


class GRU(Module):
    """Single-layer GRU; returns the final hidden state.

    Gates: z = sigmoid(x Wz + h Uz + bz), r = sigmoid(x Wr + h Ur + br),
    candidate = tanh(x Wh + (r*h) Uh + bh), h' = (1 - z)*h + z*candidate.
    """

    def __init__(self, rng: np.random.Generator, input_dim: int, hidden_dim: int,
                 dtype=np.float32):
        super().__init__()
        for gate in ("z", "r", "h"):
            w = ad.glorot_uniform(rng, (input_dim, hidden_dim),
                                  input_dim, hidden_dim, dtype)
            u = ad.glorot_uniform(rng, (hidden_dim, hidden_dim),
                                  hidden_dim, hidden_dim, dtype)
            setattr(self, f"w{gate}", Parameter(w))
            setattr(self, f"u{gate}", Parameter(u))
            setattr(self, f"b{gate}", Parameter(np.zeros(hidden_dim, dtype=dtype)))
        self.hidden_dim = hidden_dim
        self.dtype = dtype

    def forward(self, seq: Tensor) -> Tensor:
        """Consume a (B, T, D) sequence in timestamp order; returns (B, hidden)."""
        b, t, _ = seq.shape
        h = Tensor(np.zeros((b, self.hidden_dim), dtype=seq.dtype))
        for step in range(t):
            x = ad.reshape(seq[:, step, :], (b, -1))
            z = ad.sigmoid(ad.add(ad.dense(x, self.wz.tensor),
                                  ad.dense(h, self.uz.tensor, self.bz.tensor)))
            r = ad.sigmoid(ad.add(ad.dense(x, self.wr.tensor),
                                  ad.dense(h, self.ur.tensor, self.br.tensor)))
            cand = ad.tanh(ad.add(ad.dense(x, self.wh.tensor),
                                  ad.dense(ad.mul(r, h), self.uh.tensor,
                                           self.bh.tensor)))
            h = ad.add(ad.mul(ad.sub(1.0, z), h), ad.mul(z, cand))
        return h


class EventAttention(Module):
    """Multi-head attention over time with a learnable query per head."""

    def __init__(self, rng: np.random.Generator, channels: int, heads: int,
                 dtype=np.float32):
        super().__init__()
        if channels % heads != 0:
            raise ConfigurationError(
                f"channels {channels} not divisible by {heads} heads")
        self.heads = heads
        self.head_dim = channels // heads
        for h in range(heads):
            wk = ad.glorot_uniform(rng, (channels, self.head_dim),
                                   channels, self.head_dim, dtype)
            wv = ad.glorot_uniform(rng, (channels, self.head_dim),
                                   channels, self.head_dim, dtype)
            q = ad.glorot_uniform(rng, (self.head_dim, 1),
                                  self.head_dim, 1, dtype)
            setattr(self, f"wk{h}", Parameter(wk))
            setattr(self, f"wv{h}", Parameter(wv))
            setattr(self, f"query{h}", Parameter(q))

    def forward(self, seq: Tensor) -> Tensor:
        """Pool a (B, T, D) residual sequence into (B, D) event features."""
        b, t, _ = seq.shape
        outs = []
        scale = 1.0 / np.sqrt(self.head_dim)
        for h in range(self.heads):
            keys = ad.dense(seq, getattr(self, f"wk{h}").tensor)     # (B,T,dk)
            vals = ad.dense(seq, getattr(self, f"wv{h}").tensor)     # (B,T,dv)
            logits = ad.mul(ad.matmul(keys, getattr(self, f"query{h}").tensor),
                            scale)                                   # (B,T,1)
            alpha = ad.softmax(ad.reshape(logits, (b, t)), axis=-1)
            pooled = ad.matmul(ad.reshape(alpha, (b, 1, t)), vals)   # (B,1,dv)
            outs.append(ad.reshape(pooled, (b, self.head_dim)))
        return ad.concat(outs, axis=-1)


class TemporalAggregator(Module):
    """decompose -> GRU(trend) + attention(residual) -> concat."""

    def __init__(self, rng: np.random.Generator, channels: int, frames: int,
                 heads: int = 4, trend_kernel: int = 5, dtype=np.float32):
        super().__init__()
        k = clamp_kernel_size(trend_kernel, frames)
        self.trend = TrendExtractor(channels, k, dtype)
        self.gru = GRU(rng, channels, channels, dtype)
        self.events = EventAttention(rng, channels, heads, dtype)
        self.out_dim = 2 * channels

    def forward(self, seq: Tensor) -> Tensor:
        """(B, T, D) feature sequences -> (B, 2D) fused summaries."""
        trend, high = self.trend.decompose(seq)
        f_low = self.gru.forward(trend)
        f_high = self.events.forward(high)
        return ad.concat([f_low, f_high], axis=-1)

"""Per-timestamp feature extraction: frozen conv encoder plus trainable adapters.

The base encoder stands in for a large pretrained backbone: three 3x3 conv
blocks (strides 2, 2, 1; total stride 4) whose weights come from a fixed seed
and are never updated. The shallow adapter refines the first block's output,
the deep adapter the final output; with their residual projections
zero-initialized the whole stack reduces to channel-reweighted base features
at initialization.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Module, Parameter, Tensor
from ..errors import DimensionError

# fixed stand-in for pretrained weights: identical across runs by design
FROZEN_INIT_SEED = 710_2024

ENCODER_STRIDE = 4

# reflectances in [0, 1] are standardized to roughly unit scale before the
# first conv, like a pretrained backbone's input normalization
INPUT_SHIFT = 0.25
INPUT_SCALE = 4.0


def _frozen_conv(rng: np.random.Generator, k: int, cin: int, cout: int, dtype):
    # variance-preserving init so the frozen stack emits unit-scale features,
    # matching what a pretrained encoder would produce
    std = np.sqrt(2.0 / (k * k * cin))
    weight = rng.normal(0.0, std, size=(k, k, cin, cout)).astype(dtype)
    return weight, np.zeros(cout, dtype=dtype)


class FrozenEncoder(Module):
    """Three frozen conv blocks; width doubles after the first stride-2 block."""

    def __init__(self, channels: int, width: int, dtype=np.float32):
        super().__init__()
        rng = np.random.default_rng(FROZEN_INIT_SEED)
        w1 = width // 2
        k1, b1 = _frozen_conv(rng, 3, channels, w1, dtype)
        k2, b2 = _frozen_conv(rng, 3, w1, width, dtype)
        k3, b3 = _frozen_conv(rng, 3, width, width, dtype)
        self.k1 = Parameter(k1, trainable=False)
        self.b1 = Parameter(b1, trainable=False)
        self.k2 = Parameter(k2, trainable=False)
        self.b2 = Parameter(b2, trainable=False)
        self.k3 = Parameter(k3, trainable=False)
        self.b3 = Parameter(b3, trainable=False)
        self.shallow_width = w1
        self.width = width

    def block1(self, x: Tensor) -> Tensor:
        h, w = x.shape[-3], x.shape[-2]
        if h < ENCODER_STRIDE or w < ENCODER_STRIDE:
            raise DimensionError(
                f"patch {h}x{w} smaller than encoder stride {ENCODER_STRIDE}")
        x = ad.mul(ad.add(x, -INPUT_SHIFT), INPUT_SCALE)
        return ad.relu(ad.conv2d(x, self.k1.tensor, self.b1.tensor, stride=2))

    def blocks23(self, x: Tensor) -> Tensor:
        x = ad.relu(ad.conv2d(x, self.k2.tensor, self.b2.tensor, stride=2))
        return ad.relu(ad.conv2d(x, self.k3.tensor, self.b3.tensor, stride=1))


class ShallowAdapter(Module):
    """Channel re-weighting, pooled 5x5 context, and a bottleneck, residually.

    The final layer of each sub-path starts at zero, so at initialization the
    adapter only applies the (constant 0.5) channel gate.
    """

    def __init__(self, rng: np.random.Generator, channels: int,
                 bottleneck_ratio: int = 4, dtype=np.float32):
        super().__init__()
        hidden = max(1, channels // bottleneck_ratio)
        w, b = ad.dense_init(rng, channels, hidden, dtype)
        self.se_w1 = Parameter(w)
        self.se_b1 = Parameter(b)
        self.se_w2 = Parameter(np.zeros((hidden, channels), dtype=dtype))
        self.se_b2 = Parameter(np.zeros(channels, dtype=dtype))
        self.ctx_kernel = Parameter(np.zeros((5, 5, channels, channels), dtype=dtype))
        self.ctx_bias = Parameter(np.zeros(channels, dtype=dtype))
        w, b = ad.dense_init(rng, channels, hidden, dtype)
        self.bn_w1 = Parameter(w)
        self.bn_b1 = Parameter(b)
        self.bn_w2 = Parameter(np.zeros((hidden, channels), dtype=dtype))
        self.bn_b2 = Parameter(np.zeros(channels, dtype=dtype))

    def forward(self, f: Tensor) -> Tensor:
        pooled = ad.mean(f, axis=(-3, -2))                       # (..., D)
        gate = ad.sigmoid(ad.dense(ad.relu(
            ad.dense(pooled, self.se_w1.tensor, self.se_b1.tensor)),
            self.se_w2.tensor, self.se_b2.tensor))
        lead = gate.shape[:-1] + (1, 1) + gate.shape[-1:]
        f = ad.mul(f, ad.reshape(gate, lead))

        pooled = ad.mean(f, axis=(-3, -2), keepdims=True)
        grid = ad.broadcast_to(pooled, f.shape)
        ctx = ad.conv2d(grid, self.ctx_kernel.tensor, self.ctx_bias.tensor)
        f = ad.add(f, ctx)

        squeezed = ad.relu(ad.dense(f, self.bn_w1.tensor, self.bn_b1.tensor))
        f = ad.add(f, ad.dense(squeezed, self.bn_w2.tensor, self.bn_b2.tensor))
        return f


class DeepAdapter(Module):
    """3x3 conv followed by scaled dot-product attention over positions."""

    def __init__(self, rng: np.random.Generator, channels: int, dtype=np.float32):
        super().__init__()
        k, b = ad.conv_init(rng, 3, channels, channels, dtype)
        self.conv_kernel = Parameter(k)
        self.conv_bias = Parameter(b)
        self.wq = Parameter(ad.glorot_uniform(rng, (channels, channels),
                                              channels, channels, dtype))
        self.wk = Parameter(ad.glorot_uniform(rng, (channels, channels),
                                              channels, channels, dtype))
        self.wv = Parameter(ad.glorot_uniform(rng, (channels, channels),
                                              channels, channels, dtype))
        self.wo = Parameter(np.zeros((channels, channels), dtype=dtype))
        self.channels = channels

    def forward(self, f: Tensor) -> Tensor:
        b, h, w, d = f.shape
        g = ad.conv2d(f, self.conv_kernel.tensor, self.conv_bias.tensor)
        g = ad.reshape(g, (b, h * w, d))
        q = ad.dense(g, self.wq.tensor)
        k = ad.dense(g, self.wk.tensor)
        v = ad.dense(g, self.wv.tensor)
        logits = ad.mul(ad.matmul(q, ad.transpose(k, (0, 2, 1))),
                        1.0 / np.sqrt(d))
        attn = ad.matmul(ad.softmax(logits, axis=-1), v)
        out = ad.dense(attn, self.wo.tensor)
        return ad.add(f, ad.reshape(out, (b, h, w, d)))

"""Full dual-head segmentation network."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Module, Tensor
from ..errors import ConfigurationError, DimensionError
from .decoder import (AttentionPool, CrossAttentionBlock, PointTokenEncoder,
                      PredictionHead, upsample_probabilities)
from .encoder import ENCODER_STRIDE, DeepAdapter, FrozenEncoder, ShallowAdapter
from .temporal import TemporalAggregator, time_embedding


@dataclass
class ModelConfig:
    class_count: int
    channels: int = 3
    frames: int = 12
    base_width: int = 32
    bottleneck_ratio: int = 4
    attention_heads: int = 4
    context_slots: int = 8
    decoder_blocks: int = 2
    trend_kernel: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.class_count < 2:
            raise ConfigurationError("class_count must be >= 2")
        if self.base_width % (2 * self.attention_heads) != 0:
            raise ConfigurationError(
                f"base_width {self.base_width} must be divisible by "
                f"2*heads = {2 * self.attention_heads}")
        if self.frames < 1:
            raise ConfigurationError("frames must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class SegmentationModel(Module):
    """Frozen encoder + adapters + temporal aggregation + prompted decoder."""

    def __init__(self, config: ModelConfig, dtype=np.float32):
        super().__init__()
        config.validate()
        self.config = config
        self.dtype = dtype
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        width = config.base_width
        self.encoder = FrozenEncoder(config.channels, width, dtype)
        self.shallow = ShallowAdapter(rng, self.encoder.shallow_width,
                                      config.bottleneck_ratio, dtype)
        self.deep = DeepAdapter(rng, width, dtype)
        self.temporal = TemporalAggregator(rng, width, config.frames,
                                           config.attention_heads,
                                           config.trend_kernel, dtype)
        token_dim = self.temporal.out_dim
        self.tokens = PointTokenEncoder(rng, config.class_count, token_dim, dtype)
        self.pool = AttentionPool(rng, token_dim, config.context_slots, dtype)
        self.blocks = _BlockList(rng, token_dim, config.decoder_blocks, dtype)
        self.temporal_head = PredictionHead(rng, token_dim, config.class_count, dtype)
        self.spatial_head = PredictionHead(rng, token_dim, config.class_count, dtype)

    # -- forward pieces -------------------------------------------------------

    def encode_features(self, cube_patch,
                        timestamps: np.ndarray) -> tuple[Tensor, tuple[int, int]]:
        """(T, H, W, C) patch -> per-position fused summaries (H'*W', 2D).

        ``cube_patch`` may be a plain array (wrapped as a constant) or a graph
        Tensor (to differentiate with respect to the input).
        """
        t, h, w, c = cube_patch.shape
        if t != self.config.frames:
            raise DimensionError(
                f"patch has {t} frames, model built for {self.config.frames}")
        if c != self.config.channels:
            raise DimensionError(
                f"patch has {c} channels, model built for {self.config.channels}")
        if isinstance(cube_patch, Tensor):
            x = cube_patch
        else:
            x = Tensor(np.ascontiguousarray(cube_patch, dtype=self.dtype))
        f = self.encoder.block1(x)
        f = self.shallow.forward(f)
        f = self.encoder.blocks23(f)
        f = self.deep.forward(f)                                  # (T, H', W', D)
        emb = time_embedding(timestamps, self.config.base_width).astype(self.dtype)
        f = ad.add(f, Tensor(emb[:, None, None, :]))
        _, gh, gw, d = f.shape
        seq = ad.transpose(f, (1, 2, 0, 3))                        # (H', W', T, D)
        seq = ad.reshape(seq, (gh * gw, t, d))
        fused = self.temporal.forward(seq)                         # (P, 2D)
        return fused, (gh, gw)

    def decode(self, fused: Tensor, grid_hw: tuple[int, int],
               rows, cols, classes, patch_hw: tuple[int, int]):
        """Condition on point prompts and emit both dense probability maps."""
        tokens = self.tokens.forward(rows, cols, classes, *patch_hw)
        context = self.pool.forward(tokens)
        x = fused
        for block in self.blocks.items:
            x = block.forward(x, context)
        gh, gw = grid_hw
        k = self.config.class_count
        logits_t = ad.reshape(self.temporal_head.forward(x), (gh, gw, k))
        logits_s = ad.reshape(self.spatial_head.forward(x), (gh, gw, k))
        p_temp = upsample_probabilities(logits_t, patch_hw)
        p_spat = upsample_probabilities(logits_s, patch_hw)
        return p_temp, p_spat

    def forward(self, cube_patch, timestamps: np.ndarray, rows, cols, classes):
        """Full forward pass; returns (p_temp, p_spat) at patch resolution."""
        fused, grid_hw = self.encode_features(cube_patch, timestamps)
        patch_hw = tuple(cube_patch.shape[1:3])
        return self.decode(fused, grid_hw, rows, cols, classes, patch_hw)

    def predict(self, cube_patch: np.ndarray, timestamps: np.ndarray,
                rows, cols, classes) -> tuple[np.ndarray, np.ndarray]:
        """Forward pass returning plain arrays (no gradients kept)."""
        p_temp, p_spat = self.forward(cube_patch, timestamps, rows, cols, classes)
        return p_temp.data.copy(), p_spat.data.copy()

    @property
    def stride(self) -> int:
        return ENCODER_STRIDE


class _BlockList(Module):
    def __init__(self, rng, dim: int, count: int, dtype):
        super().__init__()
        self.items = []
        for i in range(count):
            block = CrossAttentionBlock(rng, dim, 2 * dim, dtype)
            setattr(self, f"block{i}", block)
            self.items.append(block)

"""Network components: frozen encoder, adapters, temporal aggregation, decoder."""

from .decoder import (AttentionPool, CrossAttentionBlock, PointTokenEncoder,
                      PredictionHead, point_position_embedding,
                      upsample_probabilities)
from .encoder import (ENCODER_STRIDE, FROZEN_INIT_SEED, DeepAdapter,
                      FrozenEncoder, ShallowAdapter)
from .network import ModelConfig, SegmentationModel
from .temporal import (GRU, EventAttention, TemporalAggregator, TrendExtractor,
                       clamp_kernel_size, time_embedding)

__all__ = [
    "ModelConfig", "SegmentationModel",
    "FrozenEncoder", "ShallowAdapter", "DeepAdapter",
    "ENCODER_STRIDE", "FROZEN_INIT_SEED",
    "TemporalAggregator", "TrendExtractor", "GRU", "EventAttention",
    "time_embedding", "clamp_kernel_size",
    "PointTokenEncoder", "AttentionPool", "CrossAttentionBlock",
    "PredictionHead", "point_position_embedding", "upsample_probabilities",
]

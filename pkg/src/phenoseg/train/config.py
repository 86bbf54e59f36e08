"""Training configuration and the run protocol defaults.

Desk-scale defaults (64-pixel patches, from-scratch learning rate) train the
default synthetic scene in minutes; ``paper_protocol()`` switches to the
large-scale fine-tuning protocol (256-pixel patches, lr 1e-5) for use with a
real pretrained backbone stand-in.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..errors import ConfigurationError
from ..grow import GrowParams
from ..model.encoder import ENCODER_STRIDE


@dataclass
class TrainConfig:
    patch_size: int = 64
    split_ratio: float = 0.8
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 2e-3
    weight_decay: float = 4e-5
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 5.0
    lambda_align: float = 1.0
    spatial_branch: bool = True
    augment: bool = True
    grow: GrowParams = field(default_factory=GrowParams)
    seed: int = 0
    deterministic: bool = True
    threads: int = 1
    # model size knobs
    base_width: int = 32
    bottleneck_ratio: int = 4
    attention_heads: int = 4
    context_slots: int = 8
    decoder_blocks: int = 2
    trend_kernel: int = 5

    def validate(self) -> None:
        if self.patch_size < ENCODER_STRIDE or self.patch_size % ENCODER_STRIDE:
            raise ConfigurationError(
                f"patch_size {self.patch_size} must be a positive multiple of "
                f"the encoder stride {ENCODER_STRIDE}")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigurationError(f"split_ratio {self.split_ratio} outside (0, 1)")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigurationError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ConfigurationError("learning_rate must be > 0, weight_decay >= 0")
        if self.lambda_align < 0:
            raise ConfigurationError("lambda_align must be >= 0")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grow"] = self.grow.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown train config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "grow" in kwargs and isinstance(kwargs["grow"], dict):
            grow_known = set(GrowParams.__dataclass_fields__)
            grow_unknown = set(kwargs["grow"]) - grow_known
            if grow_unknown:
                raise ConfigurationError(
                    f"unknown grow config keys: {sorted(grow_unknown)}")
            kwargs["grow"] = GrowParams(**kwargs["grow"])
        return cls(**kwargs)


def paper_protocol(**overrides) -> TrainConfig:
    """The published large-scale protocol: 256-pixel patches, AdamW at 1e-5."""
    cfg = TrainConfig(patch_size=256, learning_rate=1e-5, **overrides)
    return cfg

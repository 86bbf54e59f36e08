"""Training loop, patching/augmentation, optimizer and checkpointing."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import TrainConfig, paper_protocol
from .data import (PatchSample, apply_transform, augment, patchify,
                   slice_canvas_labels, split)
from .loop import (TrainResult, build_model, load_manifest, predict_canvas,
                   train, write_manifest)
from .optim import AdamW

__all__ = [
    "TrainConfig", "paper_protocol", "AdamW",
    "PatchSample", "patchify", "split", "augment", "apply_transform",
    "slice_canvas_labels",
    "train", "TrainResult", "build_model", "predict_canvas",
    "write_manifest", "load_manifest",
    "save_checkpoint", "load_checkpoint",
]

"""Miniature ingestion path: QA-bitmask cloud masking and monthly composites.

Scenes whose overall cloud fraction is not strictly below the threshold are
dropped; surviving scenes get per-pixel validity from QA bits 10 (cloud) and
11 (cirrus). Valid observations are then reduced to a 12-month cube by a
per-pixel, per-channel median; months are pooled across years.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DataFormatError
from .cube import TimeSeriesCube

QA_CLOUD_BIT = 10
QA_CIRRUS_BIT = 11
DEFAULT_SCENE_CLOUD_THRESHOLD = 0.20


@dataclass
class SceneObservation:
    """One dated acquisition: image, QA bitmask and scene-level cloud fraction."""

    image: np.ndarray          # (H, W, C) float32
    qa: np.ndarray             # (H, W) uint16 bitmask
    cloud_fraction: float
    month: int                 # 1..12
    year: int = 0

    def __post_init__(self):
        self.image = np.ascontiguousarray(self.image, dtype=np.float32)
        self.qa = np.ascontiguousarray(self.qa, dtype=np.uint16)
        if self.image.ndim != 3:
            raise DataFormatError(f"scene image must be (H,W,C), got {self.image.shape}")
        if self.qa.shape != self.image.shape[:2]:
            raise DataFormatError(
                f"QA shape {self.qa.shape} must match image {self.image.shape[:2]}")
        if not 1 <= self.month <= 12:
            raise DataFormatError(f"month {self.month} outside 1..12")


@dataclass
class RawScene:
    """A collection of dated observations over one footprint."""

    observations: list

    @property
    def shape(self):
        return self.observations[0].image.shape


@dataclass
class MaskedImage:
    values: np.ndarray   # (H, W, C) float32
    valid: np.ndarray    # (H, W) bool
    month: int


def apply_cloud_mask(raw: RawScene,
                     scene_threshold: float = DEFAULT_SCENE_CLOUD_THRESHOLD
                     ) -> list[MaskedImage]:
    """Drop cloudy scenes, then invalidate cloud/cirrus pixels via QA bits."""
    if not 0.0 < scene_threshold <= 1.0:
        raise ConfigurationError(f"scene_threshold {scene_threshold} outside (0, 1]")
    kept = []
    cloud_mask = (1 << QA_CLOUD_BIT) | (1 << QA_CIRRUS_BIT)
    for obs in raw.observations:
        if obs.cloud_fraction >= scene_threshold:
            continue
        valid = (obs.qa & cloud_mask) == 0
        kept.append(MaskedImage(obs.image.copy(), valid, obs.month))
    if not kept:
        raise DataFormatError(
            f"all {len(raw.observations)} scenes exceed cloud threshold {scene_threshold}")
    return kept


def median_composite(masked: list[MaskedImage]) -> TimeSeriesCube:
    """Per-pixel, per-channel median per calendar month into a T=12 cube.

    Pixel-months with no valid observation are filled from the nearest month
    that has one (earlier month wins ties) and flagged invalid in the cube's
    validity bitfield. A pixel with no valid observation in any month is a
    hard error.
    """
    if not masked:
        raise DataFormatError("median_composite: no input images")
    h, w, c = masked[0].values.shape
    months = np.full((12, h, w, c), np.nan, dtype=np.float64)
    have = np.zeros((12, h, w), dtype=bool)
    for month in range(1, 13):
        group = [m for m in masked if m.month == month]
        if not group:
            continue
        stack = np.stack([m.values for m in group])              # (n, H, W, C)
        valid = np.stack([m.valid for m in group])               # (n, H, W)
        stack = np.where(valid[..., None], stack, np.nan)
        with np.errstate(all="ignore"):
            med = np.nanmedian(stack.astype(np.float64), axis=0)
        ok = valid.any(axis=0)
        months[month - 1] = med
        have[month - 1] = ok

    never = ~have.any(axis=0)
    if never.any():
        coords = np.argwhere(never)[:8]
        raise DataFormatError(
            f"pixels with no valid observation in any month: "
            f"{[tuple(int(v) for v in rc) for rc in coords]}"
            + (" ..." if never.sum() > len(coords) else ""))

    # gap-fill: nearest month with data (linear distance, earlier month on ties)
    filled = months.copy()
    for month in range(12):
        missing = ~have[month]
        if not missing.any():
            continue
        order = sorted(range(12), key=lambda m: (abs(m - month), m))
        for src in order[1:]:
            take = missing & have[src]
            if take.any():
                filled[month][take] = months[src][take]
                missing &= ~take
            if not missing.any():
                break

    values = np.clip(np.nan_to_num(filled, nan=0.0), None, None).astype(np.float32)
    return TimeSeriesCube(values, np.arange(1, 13, dtype=np.int32), have)

"""Dense label maps with an explicit unlabeled state.

Label maps are stored in the cube container with T=1, C=1; class ids are cast
from uint8 into float32 values (exactly representable), with 255 meaning
UNLABELED.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataFormatError
from .cube import TimeSeriesCube, read_cube, write_cube

UNLABELED = 255


@dataclass
class PseudoLabelMap:
    """H x W pseudo-label grid produced by region growing at iteration k."""

    labels: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.labels.ndim != 2:
            raise DataFormatError(f"label map must be 2-D, got {self.labels.shape}")

    @property
    def shape(self):
        return self.labels.shape

    def labeled_fraction(self) -> float:
        return float(np.mean(self.labels != UNLABELED))

    def copy(self) -> "PseudoLabelMap":
        return PseudoLabelMap(self.labels.copy(), self.iteration)


def write_label_map(labels: np.ndarray, path) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    cube = TimeSeriesCube(labels.astype(np.float32)[None, :, :, None],
                          np.array([0], dtype=np.int32))
    write_cube(cube, path)


def read_label_map(path) -> np.ndarray:
    cube = read_cube(path)
    if cube.T != 1 or cube.C != 1:
        raise DataFormatError(
            f"{path}: label maps must have T=1, C=1, got T={cube.T}, C={cube.C}")
    vals = cube.values[0, :, :, 0]
    labels = vals.astype(np.uint8)
    if not np.array_equal(labels.astype(np.float32), vals):
        raise DataFormatError(f"{path}: label map values are not uint8 class ids")
    return labels

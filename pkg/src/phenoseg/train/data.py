"""Patch extraction, train/val splitting and geometric augmentation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..data import SparsePointSet, TimeSeriesCube
from ..data.labelmap import UNLABELED
from ..errors import ConfigurationError

TRANSFORMS = ("identity", "hflip", "vflip", "rot90", "rot180", "rot270")


@dataclass
class PatchSample:
    """One training sample: a patch-sized view of the canvas.

    ``pseudo`` holds the current pseudo-label slice and is (re)attached each
    epoch; padded pixels are marked invalid and carry UNLABELED labels.
    """

    cube: np.ndarray                 # (T, p, p, C)
    valid: np.ndarray                # (p, p) bool
    rows: np.ndarray                 # local point coordinates
    cols: np.ndarray
    classes: np.ndarray
    origin: tuple[int, int]
    truth: np.ndarray | None = None  # (p, p) uint8, UNLABELED where unknown
    pseudo: np.ndarray | None = None

    @property
    def patch_size(self) -> int:
        return self.cube.shape[1]

    @property
    def n_points(self) -> int:
        return len(self.rows)


def patchify(cube: TimeSeriesCube, points: SparsePointSet,
             truth: np.ndarray | None = None,
             patch_size: int = 64) -> list[PatchSample]:
    """Tile the canvas into non-overlapping patches (padded at the edges).

    Points are assigned to the patch containing them, with local coordinates.
    """
    t, h, w, c = cube.values.shape
    n_rows = max(1, -(-h // patch_size))
    n_cols = max(1, -(-w // patch_size))
    pixel_valid = cube.valid.all(axis=0)
    samples = []
    for pr in range(n_rows):
        for pc in range(n_cols):
            r0, c0 = pr * patch_size, pc * patch_size
            r1, c1 = min(r0 + patch_size, h), min(c0 + patch_size, w)
            patch = np.zeros((t, patch_size, patch_size, c), dtype=np.float32)
            patch[:, :r1 - r0, :c1 - c0] = cube.values[:, r0:r1, c0:c1]
            valid = np.zeros((patch_size, patch_size), dtype=bool)
            valid[:r1 - r0, :c1 - c0] = pixel_valid[r0:r1, c0:c1]
            tr = None
            if truth is not None:
                tr = np.full((patch_size, patch_size), UNLABELED, dtype=np.uint8)
                tr[:r1 - r0, :c1 - c0] = truth[r0:r1, c0:c1]
            prow, pcol, pcls = points.in_window(r0, c0, patch_size)
            samples.append(PatchSample(patch, valid, prow, pcol, pcls,
                                       (r0, c0), tr))
    return samples


def slice_canvas_labels(labels: np.ndarray, origin: tuple[int, int],
                        patch_size: int) -> np.ndarray:
    """Patch-sized view of a canvas label map, padded with UNLABELED."""
    h, w = labels.shape
    r0, c0 = origin
    out = np.full((patch_size, patch_size), UNLABELED, dtype=np.uint8)
    r1, c1 = min(r0 + patch_size, h), min(c0 + patch_size, w)
    out[:r1 - r0, :c1 - c0] = labels[r0:r1, c0:c1]
    return out


def split(samples: list, ratio: float = 0.8, seed: int = 0):
    """Deterministic disjoint, exhaustive patch-level train/val split."""
    n = len(samples)
    if n < 2:
        raise ConfigurationError(f"need at least 2 patches to split, got {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(round(ratio * n))
    n_train = min(max(n_train, 1), n - 1)
    train = [samples[i] for i in order[:n_train]]
    val = [samples[i] for i in order[n_train:]]
    return train, val


def _transform_grid(arr: np.ndarray, name: str, axes: tuple[int, int]) -> np.ndarray:
    if name == "identity":
        return arr.copy()
    if name == "hflip":
        return np.flip(arr, axis=axes[1]).copy()
    if name == "vflip":
        return np.flip(arr, axis=axes[0]).copy()
    k = {"rot90": 1, "rot180": 2, "rot270": 3}[name]
    return np.ascontiguousarray(np.rot90(arr, k=k, axes=axes))


def _transform_coords(rows: np.ndarray, cols: np.ndarray, name: str, p: int):
    if name == "identity":
        return rows.copy(), cols.copy()
    if name == "hflip":
        return rows.copy(), p - 1 - cols
    if name == "vflip":
        return p - 1 - rows, cols.copy()
    if name == "rot90":
        return p - 1 - cols, rows.copy()
    if name == "rot180":
        return p - 1 - rows, p - 1 - cols
    if name == "rot270":
        return cols.copy(), p - 1 - rows
    raise ConfigurationError(f"unknown transform {name!r}")


def apply_transform(sample: PatchSample, name: str) -> PatchSample:
    """Apply one geometric transform consistently to every field (never time)."""
    p = sample.patch_size
    rows, cols = _transform_coords(sample.rows, sample.cols, name, p)
    return replace(
        sample,
        cube=_transform_grid(sample.cube, name, axes=(1, 2)),
        valid=_transform_grid(sample.valid, name, axes=(0, 1)),
        rows=rows, cols=cols, classes=sample.classes.copy(),
        truth=None if sample.truth is None
        else _transform_grid(sample.truth, name, axes=(0, 1)),
        pseudo=None if sample.pseudo is None
        else _transform_grid(sample.pseudo, name, axes=(0, 1)),
    )


def augment(sample: PatchSample, rng: np.random.Generator | int) -> PatchSample:
    """Random flip/rotation drawn from the seeded generator."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    name = TRANSFORMS[rng.integers(len(TRANSFORMS))]
    return apply_transform(sample, name)

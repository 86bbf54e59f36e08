"""Sparse point annotations and their CSV representation.

One record per line: ``row,col,class_id``; ``#`` starts a comment. Points are
the only ground truth the training loop ever sees.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataFormatError

SPARSITY_WARN_FRACTION = 0.05


@dataclass
class SparsePointSet:
    """Annotated points on an H x W grid with classes in {0..K}."""

    rows: np.ndarray
    cols: np.ndarray
    classes: np.ndarray
    height: int
    width: int
    class_count: int = field(default=0)

    def __post_init__(self):
        self.rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        self.cols = np.ascontiguousarray(self.cols, dtype=np.int64)
        self.classes = np.ascontiguousarray(self.classes, dtype=np.int64)
        n = len(self.rows)
        if len(self.cols) != n or len(self.classes) != n:
            raise DataFormatError("rows, cols and classes must have equal length")
        if n and (self.rows.min() < 0 or self.rows.max() >= self.height
                  or self.cols.min() < 0 or self.cols.max() >= self.width):
            raise DataFormatError(
                f"point coordinates out of range for {self.height}x{self.width} grid")
        if self.class_count <= 0:
            self.class_count = int(self.classes.max()) + 1 if n else 1
        if n and (self.classes.min() < 0 or self.classes.max() >= self.class_count):
            raise DataFormatError(
                f"class ids must lie in [0, {self.class_count - 1}]")
        flat = self.rows * self.width + self.cols
        if len(np.unique(flat)) != n:
            raise DataFormatError("duplicate point coordinates")
        if n > SPARSITY_WARN_FRACTION * self.height * self.width:
            warnings.warn(
                f"{n} points on a {self.height}x{self.width} grid is not sparse",
                stacklevel=2)

    def __len__(self) -> int:
        return len(self.rows)

    def in_window(self, r0: int, c0: int, size: int):
        """Local (rows, cols, classes) of the points inside a size x size window."""
        m = ((self.rows >= r0) & (self.rows < r0 + size)
             & (self.cols >= c0) & (self.cols < c0 + size))
        return self.rows[m] - r0, self.cols[m] - c0, self.classes[m]

    def class_histogram(self) -> np.ndarray:
        return np.bincount(self.classes, minlength=self.class_count)


def read_points(path, height: int, width: int,
                class_count: int | None = None) -> SparsePointSet:
    rows, cols, classes = [], [], []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 3:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 'row,col,class_id', got {line.rstrip()!r}")
            try:
                r, c, k = (int(p) for p in parts)
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-integer field") from exc
            if not (0 <= r < height and 0 <= c < width):
                raise DataFormatError(
                    f"{path}:{lineno}: point ({r},{c}) outside {height}x{width} grid")
            rows.append(r)
            cols.append(c)
            classes.append(k)
    try:
        return SparsePointSet(np.array(rows, dtype=np.int64),
                              np.array(cols, dtype=np.int64),
                              np.array(classes, dtype=np.int64),
                              height, width,
                              class_count=class_count or 0)
    except DataFormatError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_points(points: SparsePointSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("# row,col,class_id\n")
        for r, c, k in zip(points.rows, points.cols, points.classes):
            f.write(f"{r},{c},{k}\n")

"""Time-series cube container and its binary file format.

The "WSTC" container is bit-exact on round trip:

    magic  b"WSTC"
    u16    version (= 1)
    u32    T, H, W, C
    i32[T] timestamps
    f32[T*H*W*C]  values, little-endian, t-major / row-major (t, h, w, c)
    u8[ceil(T*H*W/8)]  validity bits, one per (t, h, w), MSB-first

All multi-byte fields are little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataFormatError, DimensionError

MAGIC = b"WSTC"
VERSION = 1
_HEADER = struct.Struct("<4sHIIII")


@dataclass
class TimeSeriesCube:
    """A (T, H, W, C) reflectance stack with per-(t, h, w) validity."""

    values: np.ndarray
    timestamps: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 4:
            raise DimensionError(f"cube values must be (T,H,W,C), got {self.values.shape}")
        self.timestamps = np.ascontiguousarray(self.timestamps, dtype=np.int32)
        t = self.values.shape[0]
        if self.timestamps.shape != (t,):
            raise DimensionError(
                f"expected {t} timestamps, got shape {self.timestamps.shape}")
        if t > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise DataFormatError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DataFormatError("cube values must be finite")
        if self.valid is None:
            self.valid = np.ones(self.values.shape[:3], dtype=bool)
        else:
            self.valid = np.ascontiguousarray(self.valid, dtype=bool)
            if self.valid.shape != self.values.shape[:3]:
                raise DimensionError(
                    f"validity shape {self.valid.shape} must be {self.values.shape[:3]}")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def H(self) -> int:
        return self.values.shape[1]

    @property
    def W(self) -> int:
        return self.values.shape[2]

    @property
    def C(self) -> int:
        return self.values.shape[3]

    def pixel_profiles(self) -> np.ndarray:
        """Per-pixel trajectories, shape (H*W, T*C)."""
        return np.ascontiguousarray(
            self.values.transpose(1, 2, 0, 3).reshape(self.H * self.W, self.T * self.C))

    def slice_time(self, indices) -> "TimeSeriesCube":
        idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        return TimeSeriesCube(self.values[idx], self.timestamps[idx], self.valid[idx])


def write_cube(cube: TimeSeriesCube, path) -> None:
    t, h, w, c = cube.values.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, t, h, w, c))
        f.write(cube.timestamps.astype("<i4").tobytes())
        f.write(cube.values.astype("<f4").tobytes())
        f.write(np.packbits(cube.valid.reshape(-1)).tobytes())


def read_cube(path) -> TimeSeriesCube:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise DataFormatError(f"{path}: file too short for header")
    magic, version, t, h, w, c = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    n_vals = t * h * w * c
    n_valid_bytes = -(-(t * h * w) // 8)
    expected = _HEADER.size + 4 * t + 4 * n_vals + n_valid_bytes
    if len(raw) != expected:
        raise DataFormatError(
            f"{path}: expected {expected} bytes, found {len(raw)} (truncated or padded)")
    off = _HEADER.size
    timestamps = np.frombuffer(raw, dtype="<i4", count=t, offset=off).copy()
    off += 4 * t
    values = np.frombuffer(raw, dtype="<f4", count=n_vals, offset=off)
    values = values.reshape(t, h, w, c).copy()
    off += 4 * n_vals
    bits = np.frombuffer(raw, dtype=np.uint8, count=n_valid_bytes, offset=off)
    valid = np.unpackbits(bits, count=t * h * w).reshape(t, h, w).astype(bool)
    return TimeSeriesCube(values, timestamps, valid)

"""Versioned binary checkpoint: named parameter tensors plus the run config.

Layout (all little-endian):

    magic  b"PSCK"
    u16    version (= 1)
    u32    config length, then UTF-8 JSON (sorted keys)
    u32    parameter count
    per parameter:
        u16 name length, UTF-8 name
        u8  trainable flag
        u8  dtype code (0 = float32, 1 = float64)
        u8  ndim, then u32 per dimension
        raw value bytes

Writing the same model twice produces identical bytes, which is what the
determinism gate checks.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..autodiff import Parameter
from ..errors import DataFormatError

MAGIC = b"PSCK"
VERSION = 1
_DTYPES = {0: np.float32, 1: np.float64}
_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def save_checkpoint(path, params: list[Parameter], config: dict) -> None:
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(struct.pack("<I", len(params)))
        for p in params:
            name = p.name.encode("utf-8")
            f.write(struct.pack("<H", len(name)))
            f.write(name)
            f.write(struct.pack("<BB", int(p.trainable), _CODES[p.data.dtype]))
            f.write(struct.pack("<B", p.data.ndim))
            for dim in p.data.shape:
                f.write(struct.pack("<I", dim))
            f.write(np.ascontiguousarray(p.data).astype(p.data.dtype.newbyteorder("<")).tobytes())


def load_checkpoint(path):
    """Returns (config dict, {name: array}, {name: trainable})."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 10 or raw[:4] != MAGIC:
        raise DataFormatError(f"{path}: not a checkpoint file")
    (version,) = struct.unpack_from("<H", raw, 4)
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported checkpoint version {version}")
    off = 6
    (blob_len,) = struct.unpack_from("<I", raw, off)
    off += 4
    config = json.loads(raw[off:off + blob_len].decode("utf-8"))
    off += blob_len
    (count,) = struct.unpack_from("<I", raw, off)
    off += 4
    state: dict[str, np.ndarray] = {}
    trainable: dict[str, bool] = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", raw, off)
            off += 2
            name = raw[off:off + name_len].decode("utf-8")
            off += name_len
            flag, code, ndim = struct.unpack_from("<BBB", raw, off)
            off += 3
            shape = struct.unpack_from(f"<{ndim}I", raw, off) if ndim else ()
            off += 4 * ndim
            dtype = np.dtype(_DTYPES[code]).newbyteorder("<")
            n_elems = int(np.prod(shape, dtype=np.int64)) if ndim else 1
            arr = np.frombuffer(raw, dtype=dtype, count=n_elems, offset=off)
            arr = arr.reshape(shape).astype(_DTYPES[code])
            off += n_elems * dtype.itemsize
            state[name] = arr
            trainable[name] = bool(flag)
    except (struct.error, ValueError) as exc:
        raise DataFormatError(f"{path}: truncated checkpoint") from exc
    if off != len(raw):
        raise DataFormatError(f"{path}: trailing bytes in checkpoint")
    return config, state, trainable

"""Standalone CDF1 reader/writer.

The format is deliberately tiny so every consumer re-implements it in a few
lines: magic "CDF1", three little-endian u32 (height, width, channels in
{1, 2}), then channels*H*W little-endian float32, planar, row-major.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"CDF1"


class Cdf1Error(ValueError):
    pass


def read(path) -> np.ndarray:
    """Load a CDF1 file as a (channels, H, W) float32 array."""
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise Cdf1Error(f"{path}: bad magic, not a CDF1 file")
    h, w, c = struct.unpack("<III", data[4:16])
    if c not in (1, 2):
        raise Cdf1Error(f"{path}: unsupported channel count {c}")
    if len(data) != 16 + 4 * c * h * w:
        raise Cdf1Error(f"{path}: payload size mismatch")
    return np.frombuffer(data, dtype="<f4", offset=16).reshape(c, h, w).copy()


def write(path, planes: np.ndarray):
    """Write a (channels, H, W) array as CDF1 (atomically)."""
    planes = np.ascontiguousarray(planes, dtype="<f4")
    if planes.ndim != 3 or planes.shape[0] not in (1, 2):
        raise Cdf1Error(f"need (1|2, H, W) planes, got shape {planes.shape}")
    c, h, w = planes.shape
    payload = MAGIC + struct.pack("<III", h, w, c) + planes.tobytes()
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)

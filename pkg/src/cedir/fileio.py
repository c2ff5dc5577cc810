"""File formats: CDF1 binary tensors, points CSV, PGM export.

CDF1 is a minimal planar float32 tensor file so that any language can read
it in a few lines: magic "CDF1", three little-endian u32 (height, width,
channels in {1, 2}), then channels*H*W little-endian IEEE-754 float32
values, planar and row-major. Writes go through a temp file plus rename so
readers never observe partial files.
"""
from __future__ import annotations

import csv
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .fields import DirectionField, ScoreMap
from .localizer import Detection

MAGIC = b"CDF1"
_HEADER = struct.Struct("<III")


class FormatError(ValueError):
    """Malformed or mismatched file content."""


def _atomic_write(path, data: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def field_to_bytes(obj: DirectionField | ScoreMap) -> bytes:
    if isinstance(obj, DirectionField):
        planes = np.stack([obj.sin_plane, obj.cos_plane])
    elif isinstance(obj, ScoreMap):
        planes = obj.values[None]
    else:
        raise FormatError(f"cannot serialize {type(obj).__name__}")
    c, h, w = planes.shape
    payload = np.ascontiguousarray(planes, dtype="<f4").tobytes()
    return MAGIC + _HEADER.pack(h, w, c) + payload


def write_field(path, obj: DirectionField | ScoreMap):
    _atomic_write(path, field_to_bytes(obj))


def field_from_bytes(data: bytes) -> DirectionField | ScoreMap:
    if len(data) < 16 or data[:4] != MAGIC:
        raise FormatError("bad magic: not a CDF1 file")
    h, w, c = _HEADER.unpack(data[4:16])
    if c not in (1, 2):
        raise FormatError(f"unsupported channel count {c}")
    expected = 16 + 4 * c * h * w
    if len(data) < expected:
        raise FormatError("truncated payload")
    if len(data) > expected:
        raise FormatError("trailing bytes after payload")
    planes = np.frombuffer(data, dtype="<f4", offset=16).reshape(c, h, w)
    if c == 2:
        return DirectionField(planes[0].astype(np.float64),
                              planes[1].astype(np.float64))
    return ScoreMap(planes[0].astype(np.float64))


def read_field(path) -> DirectionField | ScoreMap:
    return field_from_bytes(Path(path).read_bytes())


def read_direction_field(path) -> DirectionField:
    obj = read_field(path)
    if not isinstance(obj, DirectionField):
        raise FormatError(f"channel mismatch: {path} is not a 2-channel field")
    return obj


def read_score_map(path) -> ScoreMap:
    obj = read_field(path)
    if not isinstance(obj, ScoreMap):
        raise FormatError(f"channel mismatch: {path} is not a 1-channel map")
    return obj


def write_points_csv(path, by_image: dict[str, np.ndarray | list]):
    """Points or detections grouped by image id, sorted by id.

    Rows are (image_id, row, col) or (image_id, row, col, score); a file
    carries the score column when any group has 3-column rows.
    """
    groups = {}
    with_score = False
    for image_id, rows in by_image.items():
        arr = np.asarray(rows, dtype=np.float64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise FormatError("points must be (row, col) or (row, col, score)")
        groups[str(image_id)] = arr
        with_score = with_score or arr.shape[1] == 3
    lines = ["image_id,row,col,score" if with_score else "image_id,row,col"]
    for image_id in sorted(groups):
        for row in groups[image_id]:
            cells = [image_id] + [repr(float(x)) for x in row]
            if with_score and len(cells) == 3:
                raise FormatError("mixed rows with and without scores")
            lines.append(",".join(cells))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_points_csv(path) -> dict[str, np.ndarray]:
    """Parse a points CSV back into image-id keyed coordinate arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty CSV") from None
        if header[:3] != ["image_id", "row", "col"]:
            raise FormatError(f"{path}: expected header image_id,row,col[,score]")
        with_score = header[3:] == ["score"]
        if header[3:] not in ([], ["score"]):
            raise FormatError(f"{path}: unrecognized columns {header[3:]}")
        width = 3 if with_score else 2
        out: dict[str, list] = {}
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != width + 1:
                raise FormatError(f"{path}:{lineno}: expected {width + 1} cells")
            try:
                values = [float(x) for x in cells[1:]]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            out.setdefault(cells[0], []).append(values)
    return {k: np.asarray(v, dtype=np.float64) for k, v in out.items()}


def detections_to_rows(dets: list[Detection]) -> np.ndarray:
    return np.asarray([(d.row, d.col, d.score) for d in dets],
                      dtype=np.float64).reshape(-1, 3)


def rows_to_detections(rows: np.ndarray) -> list[Detection]:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.size == 0:
        return []
    if rows.shape[1] == 2:   # plain points: unit score
        return [Detection(r, c, 1.0) for r, c in rows]
    return [Detection(r, c, s) for r, c, s in rows]


def export_pgm(plane: np.ndarray, path):
    """Binary PGM (P5) with min-max scaling to 0..255.

    A constant plane maps to mid-gray 128; rounding is round-half-up so the
    byte values are platform independent.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise FormatError("PGM export needs a 2-D plane")
    if not np.all(np.isfinite(plane)):
        raise FormatError("PGM export needs finite values")
    lo, hi = float(plane.min()), float(plane.max())
    if hi > lo:
        scaled = (plane - lo) / (hi - lo) * 255.0
        bytes_ = np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)
    else:
        bytes_ = np.full(plane.shape, 128, dtype=np.uint8)
    h, w = plane.shape
    _atomic_write(path, f"P5\n{w} {h}\n255\n".encode("ascii") + bytes_.tobytes())

"""Dense center-direction fields from point annotations.

Conventions used throughout the package:
  * (row, col) indexing; row 0 is the top of the image.
  * A point set lives on an H x W pixel grid; point coordinates are real
    valued and are never snapped to the grid.
  * The two field channels are sin_plane = (m - j) / r and
    cos_plane = (n - i) / r for the nearest center (n, m) seen from pixel
    (i, j), with r the Euclidean distance. At a pixel exactly on a center
    (r = 0) both channels are 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class FieldError(ValueError):
    """Invalid point/field data."""


@dataclass
class PointSet:
    """Ordered center coordinates within one H x W image.

    Order is meaningful: nearest-center ties are broken by the lowest
    point index.
    """

    height: int
    width: int
    points: np.ndarray  # (N, 2) float64, rows (row, col)

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise FieldError("image dimensions must be positive")
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if pts.size and not np.all(np.isfinite(pts)):
            raise FieldError("point coordinates must be finite")
        if pts.size:
            rows, cols = pts[:, 0], pts[:, 1]
            if (rows < 0).any() or (rows >= self.height).any() \
                    or (cols < 0).any() or (cols >= self.width).any():
                raise FieldError("point outside the image bounds")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class DirectionField:
    """Two-channel center-direction field (sin and cos planes)."""

    sin_plane: np.ndarray
    cos_plane: np.ndarray

    def __post_init__(self):
        self.sin_plane = np.asarray(self.sin_plane, dtype=np.float64)
        self.cos_plane = np.asarray(self.cos_plane, dtype=np.float64)
        if self.sin_plane.shape != self.cos_plane.shape or self.sin_plane.ndim != 2:
            raise FieldError("sin/cos planes must be 2-D and equally shaped")

    @property
    def height(self) -> int:
        return self.sin_plane.shape[0]

    @property
    def width(self) -> int:
        return self.sin_plane.shape[1]


@dataclass
class ScoreMap:
    """Single-channel dense map (localization target or localizer response)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise FieldError("score map must be 2-D")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass
class WeightMap:
    """Per-pixel loss weights balancing near-center and background pixels."""

    w: np.ndarray
    foreground: np.ndarray = field(repr=False, default=None)  # bool mask

    @property
    def height(self) -> int:
        return self.w.shape[0]

    @property
    def width(self) -> int:
        return self.w.shape[1]


def nearest_center(points: PointSet, chunk_elems: int = 8_000_000):
    """Nearest-center index and distance for every pixel.

    Ties are broken by the lowest point index (argmin over the point axis).
    Distances are compared as squared Euclidean in float64, which makes the
    result bit-identical to a per-pixel loop over all centers.

    Returns (index map (H, W) int64, distance map (H, W) float64).
    """
    if len(points) == 0:
        raise FieldError("no centers")
    h, w, pts = points.height, points.width, points.points
    n = len(points)
    idx = np.empty((h, w), dtype=np.int64)
    d2 = np.empty((h, w), dtype=np.float64)
    cols = np.arange(w, dtype=np.float64)
    dc = pts[:, 1][:, None] - cols[None, :]
    dc2 = dc * dc  # (N, W); plain product, not **2, to match scalar loops bit-exactly
    chunk = max(1, chunk_elems // max(1, n * w))
    for r0 in range(0, h, chunk):
        r1 = min(h, r0 + chunk)
        rows = np.arange(r0, r1, dtype=np.float64)
        dr = pts[:, 0][:, None] - rows[None, :]
        dr2 = dr * dr  # (N, rows)
        dist2 = dr2[:, :, None] + dc2[:, None, :]        # (N, rows, W)
        idx[r0:r1] = np.argmin(dist2, axis=0)
        d2[r0:r1] = np.take_along_axis(dist2, idx[r0:r1][None], axis=0)[0]
    return idx, np.sqrt(d2)


def encode_direction_field(points: PointSet) -> DirectionField:
    """Encode a point set into the dense (sin, cos) direction field.

    Every pixel gets the unit direction towards its nearest center,
    re-parametrized as sin/cos of the direction angle. Exact-center pixels
    (distance 0) get (0, 0).
    """
    idx, dist = nearest_center(points)
    pts = points.points
    rows = np.arange(points.height, dtype=np.float64)[:, None]
    cols = np.arange(points.width, dtype=np.float64)[None, :]
    dn = pts[idx, 0] - rows  # n - i
    dm = pts[idx, 1] - cols  # m - j
    with np.errstate(invalid="ignore", divide="ignore"):
        sin_plane = np.where(dist > 0.0, dm / dist, 0.0)
        cos_plane = np.where(dist > 0.0, dn / dist, 0.0)
    return DirectionField(sin_plane, cos_plane)


def decode_angle(fld: DirectionField) -> np.ndarray:
    """Per-pixel direction angle atan2(sin, cos), mapped into (-pi, pi]."""
    if not (np.all(np.isfinite(fld.sin_plane)) and np.all(np.isfinite(fld.cos_plane))):
        raise FieldError("field contains non-finite values")
    angle = np.arctan2(fld.sin_plane, fld.cos_plane)
    # atan2(-0.0, x<0) returns -pi; fold onto +pi so the range is half-open
    return np.where(angle == -np.pi, np.pi, angle)


def weight_map(points: PointSet, epsilon: float) -> WeightMap:
    """Foreground/background weights from the cutoff radius epsilon.

    A pixel belongs to the k-th foreground set when its nearest center is
    point k and the distance is strictly below epsilon. Each non-empty
    foreground set sums to 1/K (K = number of non-empty sets) and the
    background sums to 1. epsilon = 0 disables the scheme: every pixel is
    background with uniform weight.
    """
    if epsilon < 0:
        raise FieldError("epsilon must be non-negative")
    h, w = points.height, points.width
    if len(points) == 0 or epsilon == 0.0:
        wmap = np.full((h, w), 1.0 / (h * w))
        return WeightMap(wmap, np.zeros((h, w), dtype=bool))
    idx, dist = nearest_center(points)
    fg = dist < epsilon
    n_bg = int((~fg).sum())
    if n_bg == 0:
        raise FieldError("degenerate background: every pixel within epsilon")
    sizes = np.bincount(idx[fg], minlength=len(points))
    k_eff = int((sizes > 0).sum())
    wmap = np.empty((h, w), dtype=np.float64)
    wmap[~fg] = 1.0 / n_bg
    if k_eff:
        per_pixel = np.zeros(len(points))
        nonzero = sizes > 0
        per_pixel[nonzero] = 1.0 / (k_eff * sizes[nonzero])
        wmap[fg] = per_pixel[idx[fg]]
    return WeightMap(wmap, fg)

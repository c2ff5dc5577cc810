"""Non-learnable localization from direction fields, plus peak extraction.

Object centers are sinks of the direction field: crossing a center, the
cos channel flips sign along rows and the sin channel along columns. A bank
of 1-D edge filters at several scales turns those sign flips into a response
map whose local maxima are the detections. An ideal isolated center scores
about 1, so thresholds live on a stable scale regardless of kernel count.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .fields import DirectionField, ScoreMap
from .filters import correlate_axis

DEFAULT_KERNEL_SIZES = (3, 9, 15, 21, 31, 51, 65)


class LocalizerError(ValueError):
    pass


class Detection(NamedTuple):
    row: float
    col: float
    score: float


@dataclass
class LocalizerConfig:
    kernel_sizes: tuple[int, ...] = DEFAULT_KERNEL_SIZES
    nms_radius: int = 2
    score_threshold: float = 0.5

    def __post_init__(self):
        for k in self.kernel_sizes:
            if k < 3 or k % 2 == 0:
                raise LocalizerError(f"kernel sizes must be odd and >= 3, got {k}")
        if self.nms_radius < 1:
            raise LocalizerError("nms_radius must be >= 1")


def edge_kernel(k: int) -> np.ndarray:
    """Step-detecting 1-D kernel: (k-1)/2 taps of -1, a 0, then +1 taps.

    Scaled by 1/(k-1) so a full -1 to +1 channel transition responds with
    magnitude 1 at every kernel size.
    """
    if k < 3 or k % 2 == 0:
        raise LocalizerError(f"kernel size must be odd and >= 3, got {k}")
    half = (k - 1) // 2
    taps = np.concatenate([np.full(half, -1.0), [0.0], np.full(half, 1.0)])
    return taps / (k - 1)


def handcrafted_response(fld: DirectionField,
                         config: LocalizerConfig | None = None) -> ScoreMap:
    """Multi-scale negative divergence of the direction field.

    Per scale: the edge-filter derivative of cos_plane along rows plus that
    of sin_plane along columns, negated so sinks (centers) peak positively.
    Averaged over scales and the two channel terms; replicate padding keeps
    image borders from fabricating edges.
    """
    if config is None:
        config = LocalizerConfig()
    sin = np.asarray(fld.sin_plane, dtype=np.float64)
    cos = np.asarray(fld.cos_plane, dtype=np.float64)
    if not (np.all(np.isfinite(sin)) and np.all(np.isfinite(cos))):
        raise LocalizerError("field contains non-finite values")
    response = np.zeros_like(cos)
    for k in config.kernel_sizes:
        taps = edge_kernel(k)
        response -= correlate_axis(cos, taps, axis=0)
        response -= correlate_axis(sin, taps, axis=1)
    return ScoreMap(response / (2.0 * len(config.kernel_sizes)))


def find_peaks(score: ScoreMap, threshold: float, nms_radius: int = 2) -> list[Detection]:
    """Thresholded local maxima of a score map.

    A pixel is a detection when its score is >= threshold and is the maximum
    of its (2*nms_radius+1)^2 window. Among equal-valued candidates within
    one window (plateaus), only the lexicographically smallest (row, col)
    survives. Detections are sorted by score descending, ties by position.
    """
    if nms_radius < 1:
        raise LocalizerError("nms_radius must be >= 1")
    values = score.values
    size = 2 * nms_radius + 1
    window_max = ndimage.maximum_filter(values, size=size, mode="nearest")
    cand = np.argwhere((values >= threshold) & (values == window_max))

    # argwhere yields candidates in lexicographic order; a candidate is kept
    # unless an equal-valued candidate already seen lies within its window
    by_row: dict[int, list[int]] = {}
    kept: list[Detection] = []
    for r, c in cand:
        r, c = int(r), int(c)
        v = values[r, c]
        suppressed = False
        for rr in range(max(0, r - nms_radius), r + 1):
            cols = by_row.get(rr)
            if not cols:
                continue
            lo = bisect.bisect_left(cols, c - nms_radius)
            hi = bisect.bisect_right(cols, c + nms_radius)
            for cc in cols[lo:hi]:
                if (rr, cc) != (r, c) and values[rr, cc] == v:
                    suppressed = True
                    break
            if suppressed:
                break
        by_row.setdefault(r, []).append(c)
        if not suppressed:
            kept.append(Detection(float(r), float(c), float(v)))

    kept.sort(key=lambda d: (-d.score, d.row, d.col))
    return kept

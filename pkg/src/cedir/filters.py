"""Separable 1-D filtering with replicate padding.

Thin wrappers over scipy.ndimage so kernel definitions stay pinned here:
zero padding would fabricate edges at the image border, so everything in
this package filters with replicate ('nearest') boundaries.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage


def correlate_axis(plane: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """1-D correlation of a 2-D plane along one axis, replicate padding."""
    return ndimage.correlate1d(np.asarray(plane, dtype=np.float64),
                               np.asarray(kernel, dtype=np.float64),
                               axis=axis, mode="nearest")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized Gaussian taps truncated at 3*sigma (radius ceil(3*sigma))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur (rows then columns), replicate padding."""
    k = gaussian_kernel(sigma)
    return correlate_axis(correlate_axis(plane, k, axis=0), k, axis=1)

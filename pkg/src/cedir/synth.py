"""Seeded synthetic scenes for training and stressing localizers.

A scene is a random point layout, its clean direction field, a corrupted
copy (Gaussian noise and circular occlusions around centers), and the
Gaussian localization target. Every random choice comes from a labelled
splitmix64 substream of the scene seed, so scenes regenerate bit-identically
and generation parallelizes trivially across seeds.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import DirectionField, PointSet, ScoreMap, encode_direction_field
from .filters import gaussian_blur
from .losses import DEFAULT_SIGMA, DEFAULT_XI, localization_target
from .rng import Stream, derive

# substream labels (kept as small ints so the stream tree is portable)
_L_COUNT = 1
_L_PLACE = 2
_L_CLUSTER = 3
_L_NOISE = 4
_L_OCCLUSION = 5
_L_MASK = 6


class SynthError(RuntimeError):
    """Scene generation failure (e.g. rejection sampling exhausted)."""


@dataclass
class SynthConfig:
    height: int = 512
    width: int = 512
    n_points_range: tuple[int, int] = (5, 50)
    cluster_prob: float = 0.25
    cluster_count_range: tuple[int, int] = (2, 5)
    cluster_radius: float = 15.0
    noise_prob: float = 0.25
    noise_sigma_range: tuple[float, float] = (0.1, 2.0)
    noise_blur_sigma: float = 3.0
    occl_prob: float = 0.75
    occl_perturb_prob: float = 0.5
    occl_radius_min: float = 5.0
    occl_radius_frac: float = 0.025  # of the image diagonal
    min_separation: float = 10.0

    def validate(self):
        for name in ("cluster_prob", "noise_prob", "occl_prob", "occl_perturb_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise SynthError(f"{name} must be a probability, got {p}")
        for name in ("n_points_range", "cluster_count_range", "noise_sigma_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise SynthError(f"{name} is empty: {(lo, hi)}")
        if self.height <= 0 or self.width <= 0:
            raise SynthError("scene size must be positive")


@dataclass
class SynthScene:
    points: PointSet
    clean_field: DirectionField
    corrupted_field: DirectionField
    target: ScoreMap
    seed: int
    primary_count: int = dc_field(default=0)


def _clip_inside(v: float, limit: int) -> float:
    """Clip a coordinate into the half-open interval [0, limit)."""
    return min(max(v, 0.0), np.nextafter(float(limit), 0.0))


def _sample_points(config: SynthConfig, seed: int) -> tuple[np.ndarray, int]:
    count_stream = Stream(derive(seed, _L_COUNT))
    n_primary = count_stream.randint(*config.n_points_range)

    place = Stream(derive(seed, _L_PLACE))
    primaries: list[tuple[float, float]] = []
    budget = 10 * n_primary
    attempts = 0
    min_sep2 = config.min_separation ** 2
    while len(primaries) < n_primary:
        if attempts >= budget:
            raise SynthError(
                f"cannot place points: {n_primary} requested, "
                f"{len(primaries)} placed in {attempts} attempts")
        attempts += 1
        r = place.uniform() * config.height
        c = place.uniform() * config.width
        if all((r - pr) ** 2 + (c - pc) ** 2 >= min_sep2 for pr, pc in primaries):
            primaries.append((r, c))

    points = list(primaries)
    for k, (pr, pc) in enumerate(primaries):
        cluster = Stream(derive(seed, _L_CLUSTER, k))
        if cluster.uniform() >= config.cluster_prob:
            continue
        extra = cluster.randint(*config.cluster_count_range)
        for _ in range(extra):
            theta = 2.0 * np.pi * cluster.uniform()
            rho = config.cluster_radius * np.sqrt(cluster.uniform())
            points.append((_clip_inside(pr + rho * np.cos(theta), config.height),
                           _clip_inside(pc + rho * np.sin(theta), config.width)))
    return np.asarray(points, dtype=np.float64), n_primary


def add_gaussian_noise(fld: DirectionField, seed: int,
                       sigma_range: tuple[float, float] = (0.1, 2.0),
                       blur_sigma: float = 3.0,
                       prob: float = 0.25) -> DirectionField:
    """Blurred zero-mean Gaussian noise on both channels, with probability prob.

    The noise plane (not the field) is blurred before being added, and the
    result is deliberately not clamped to [-1, 1]: real regressors produce
    out-of-range values too.
    """
    stream = Stream(seed)
    if stream.uniform() >= prob:
        return DirectionField(fld.sin_plane.copy(), fld.cos_plane.copy())
    sigma = sigma_range[0] + (sigma_range[1] - sigma_range[0]) * stream.uniform()
    h, w = fld.height, fld.width
    noise = stream.normals(2 * h * w).reshape(2, h, w) * sigma
    return DirectionField(fld.sin_plane + gaussian_blur(noise[0], blur_sigma),
                          fld.cos_plane + gaussian_blur(noise[1], blur_sigma))


def add_occlusions(fld: DirectionField, points: PointSet, seed: int,
                   config: SynthConfig) -> DirectionField:
    """Zero out a random disk around each center, independently per point.

    Disk radius is drawn from [r_min, 0.025*D] (D = image diagonal) skewed
    towards larger values via sqrt of a uniform; with probability
    occl_perturb_prob the disk center is displaced uniformly within half the
    radius. Zero is the encoder's "undefined direction" convention.
    """
    sin = fld.sin_plane.copy()
    cos = fld.cos_plane.copy()
    h, w = fld.height, fld.width
    diag = float(np.hypot(h, w))
    r_max = max(config.occl_radius_min, config.occl_radius_frac * diag)
    for k, (pr, pc) in enumerate(points.points):
        stream = Stream(derive(seed, k))
        if stream.uniform() >= config.occl_prob:
            continue
        radius = config.occl_radius_min + \
            (r_max - config.occl_radius_min) * np.sqrt(stream.uniform())
        cr, cc = pr, pc
        if stream.uniform() < config.occl_perturb_prob:
            theta = 2.0 * np.pi * stream.uniform()
            rho = 0.5 * radius * np.sqrt(stream.uniform())
            cr += rho * np.cos(theta)
            cc += rho * np.sin(theta)
        r0, r1 = max(0, int(np.floor(cr - radius))), min(h, int(np.ceil(cr + radius)) + 1)
        c0, c1 = max(0, int(np.floor(cc - radius))), min(w, int(np.ceil(cc + radius)) + 1)
        if r0 >= r1 or c0 >= c1:
            continue
        rows = np.arange(r0, r1, dtype=np.float64)[:, None]
        cols = np.arange(c0, c1, dtype=np.float64)[None, :]
        inside = (rows - cr) ** 2 + (cols - cc) ** 2 <= radius * radius
        sin[r0:r1, c0:c1][inside] = 0.0
        cos[r0:r1, c0:c1][inside] = 0.0
    return DirectionField(sin, cos)


def generate_scene(config: SynthConfig, seed: int) -> SynthScene:
    """One fully reproducible scene: points, clean/corrupted fields, target."""
    config.validate()
    coords, n_primary = _sample_points(config, seed)
    points = PointSet(config.height, config.width, coords)
    clean = encode_direction_field(points)
    target = localization_target(points, DEFAULT_SIGMA, DEFAULT_XI)
    noisy = add_gaussian_noise(clean, derive(seed, _L_NOISE),
                               config.noise_sigma_range, config.noise_blur_sigma,
                               config.noise_prob)
    corrupted = add_occlusions(noisy, points, derive(seed, _L_OCCLUSION), config)
    return SynthScene(points, clean, corrupted, target, seed, n_primary)


def occlusion_noise_mask(height: int, width: int, fraction: float, seed: int) -> np.ndarray:
    """Blob-shaped boolean occlusion mask covering the requested pixel fraction.

    Uniform per-pixel noise is blurred (sigma = 5) and the top `fraction`
    quantile of the blurred values is selected, which yields contiguous blobs
    whose total area matches the request to within rounding of one pixel.
    """
    if not 0.0 <= fraction <= 1.0:
        raise SynthError(f"fraction must be in [0, 1], got {fraction}")
    n = height * width
    k = int(round(fraction * n))
    if k == 0:
        return np.zeros((height, width), dtype=bool)
    if k == n:
        return np.ones((height, width), dtype=bool)
    stream = Stream(derive(seed, _L_MASK))
    noise = stream.uniforms(n).reshape(height, width)
    blurred = gaussian_blur(noise, 5.0)
    order = np.argsort(-blurred.ravel(), kind="stable")  # ties: lowest index first
    mask = np.zeros(n, dtype=bool)
    mask[order[:k]] = True
    return mask.reshape(height, width)


def apply_occlusion_mask(fld: DirectionField, mask: np.ndarray) -> DirectionField:
    """Zero both channels wherever the mask is set."""
    if mask.shape != fld.sin_plane.shape:
        raise SynthError("mask shape does not match the field")
    sin = fld.sin_plane.copy()
    cos = fld.cos_plane.copy()
    sin[mask] = 0.0
    cos[mask] = 0.0
    return DirectionField(sin, cos)

"""Scene loading for training: corrupted fields in, Gaussian targets out.

Scenes are whatever the primary `synth` command wrote: per scene a
`*_corrupt.cdf1` 2-channel input and a `*_target.cdf1` 1-channel target.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import cdf1


class SceneDataset:
    def __init__(self, scene_dir):
        self.scene_dir = Path(scene_dir)
        self.stems = sorted(
            p.name[:-len("_corrupt.cdf1")]
            for p in self.scene_dir.glob("*_corrupt.cdf1")
            if (self.scene_dir / (p.name[:-len("_corrupt.cdf1")] + "_target.cdf1")).exists())
        if not self.stems:
            raise FileNotFoundError(f"no scene pairs under {self.scene_dir}")

    def __len__(self) -> int:
        return len(self.stems)

    def load(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """(input (2, H, W), target (1, H, W)) as float32."""
        stem = self.stems[index]
        field = cdf1.read(self.scene_dir / f"{stem}_corrupt.cdf1")
        target = cdf1.read(self.scene_dir / f"{stem}_target.cdf1")
        if field.shape[0] != 2 or target.shape[0] != 1:
            raise cdf1.Cdf1Error(f"scene {stem}: unexpected channel layout")
        return field, target


def random_crop(field: np.ndarray, target: np.ndarray, crop: int,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    _, h, w = field.shape
    if crop > h or crop > w:
        raise ValueError(f"crop {crop} exceeds scene size {h}x{w}")
    r = int(rng.integers(0, h - crop + 1))
    c = int(rng.integers(0, w - crop + 1))
    return field[:, r:r + crop, c:c + crop], target[:, r:r + crop, c:c + crop]

"""Inference: a 2-channel direction-field CDF1 in, a score-map CDF1 out."""
from __future__ import annotations

import numpy as np
import torch

from . import cdf1
from .train import load_checkpoint


def infer_array(model, field: np.ndarray) -> np.ndarray:
    """(2, H, W) field -> (1, H, W) score map in (0, 1).

    Sizes that are not a multiple of the network stride are replicate-padded
    and cropped back.
    """
    if field.ndim != 3 or field.shape[0] != 2:
        raise cdf1.Cdf1Error(f"channel mismatch: expected (2, H, W), got {field.shape}")
    stride = model.spec.stride
    _, h, w = field.shape
    pad_h = (-h) % stride
    pad_w = (-w) % stride
    x = torch.from_numpy(np.ascontiguousarray(field, dtype=np.float32))[None]
    if pad_h or pad_w:
        x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h), mode="replicate")
    with torch.no_grad():
        out = model(x)
    return out[0, :, :h, :w].numpy().astype(np.float32)


def infer_export(checkpoint, field_path, out_path) -> None:
    model = load_checkpoint(checkpoint)
    score = infer_array(model, cdf1.read(field_path))
    cdf1.write(out_path, score)

"""Training loop for the hourglass localizer.

Adam at 1e-4 with per-epoch polynomial decay (1 - n)^0.9 over the epoch
fraction n, and the foreground-weighted L1 loss (w_fg = 50 on pixels whose
target is positive; the generator's targets are positive everywhere, so by
default this is uniform). An optional target floor reclassifies the
target's long exponential tail as weight-1 background, but down-weighting
the far background lets spurious bumps survive there, so it stays off.
Every run writes a manifest (hyperparameters, parameter count, seed), the
loss curve CSV and the checkpoint.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .data import SceneDataset, random_crop
from .model import HourglassNet, HourglassSpec

DEFAULT_W_FG = 50.0


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 16
    crop: int = 192
    lr: float = 1e-4
    poly_power: float = 0.9
    w_fg: float = DEFAULT_W_FG
    target_floor: float = 0.0   # values below count as weight-1 background
    seed: int = 0
    scenes_per_epoch: int = 0   # 0: every scene once per epoch


def weighted_l1(pred: torch.Tensor, target: torch.Tensor,
                w_fg: float = DEFAULT_W_FG, target_floor: float = 0.0) -> torch.Tensor:
    if target_floor > 0.0:
        target = torch.where(target < target_floor, torch.zeros_like(target), target)
    weights = torch.where(target > 0, torch.full_like(target, w_fg),
                          torch.ones_like(target))
    return (weights * (pred - target).abs()).mean()


def train(scene_dir, outdir, config: TrainConfig | None = None,
          spec: HourglassSpec | None = None, log=print) -> Path:
    config = config or TrainConfig()
    spec = spec or HourglassSpec()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(config.seed)
    dataset = SceneDataset(scene_dir)
    model = HourglassNet(spec)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)

    manifest = {
        "config": asdict(config),
        "spec": asdict(spec),
        "parameter_count": model.parameter_count(),
        "n_scenes": len(dataset),
        "torch_version": torch.__version__,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    per_epoch = config.scenes_per_epoch or len(dataset)
    curve: list[tuple[int, int, float]] = []
    step = 0
    t0 = time.perf_counter()
    model.train()
    for epoch in range(config.epochs):
        frac = epoch / config.epochs
        lr = config.lr * (1.0 - frac) ** config.poly_power
        for group in optimizer.param_groups:
            group["lr"] = lr
        rng = np.random.default_rng((config.seed, epoch))
        order = rng.permutation(len(dataset))[:per_epoch]
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch_idx = order[start:start + config.batch_size]
            fields, targets = [], []
            for i in batch_idx:
                f, t = dataset.load(int(i))
                f, t = random_crop(f, t, config.crop, rng)
                fields.append(f)
                targets.append(t)
            x = torch.from_numpy(np.stack(fields))
            y = torch.from_numpy(np.stack(targets))
            optimizer.zero_grad()
            loss = weighted_l1(model(x), y, config.w_fg, config.target_floor)
            loss.backward()
            optimizer.step()
            step += 1
            epoch_losses.append(loss.item())
            curve.append((epoch, step, loss.item()))
        log(f"epoch {epoch + 1}/{config.epochs} lr {lr:.2e} "
            f"loss {np.mean(epoch_losses):.5f} ({time.perf_counter() - t0:.0f}s)")

    with open(outdir / "loss_curve.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,step,loss\n")
        for epoch, s, value in curve:
            fh.write(f"{epoch},{s},{value!r}\n")

    checkpoint = outdir / "checkpoint.pt"
    torch.save({"spec": asdict(spec), "state_dict": model.state_dict()}, checkpoint)
    return checkpoint


def load_checkpoint(path) -> HourglassNet:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    spec = HourglassSpec(**{k: tuple(v) if isinstance(v, list) else v
                            for k, v in payload["spec"].items()})
    model = HourglassNet(spec)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model

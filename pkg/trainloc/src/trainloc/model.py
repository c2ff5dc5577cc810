"""Hourglass localization network.

Four stride-2 conv blocks down, a dilated multi-rate middle (rates 1, 4,
8, 12, summed), four upsample+conv blocks back up with additive skip
connections, and a sigmoid 1x1 head. Input is the 2-channel direction
field, output a same-sized center-score map in (0, 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass
class HourglassSpec:
    in_channels: int = 2
    out_channels: int = 1
    encoder_channels: tuple[int, ...] = (16, 16, 32, 32)
    dilations: tuple[int, ...] = (1, 4, 8, 12)

    @property
    def stride(self) -> int:
        return 2 ** len(self.encoder_channels)


def conv_block(cin: int, cout: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class DilatedMiddle(nn.Module):
    """Parallel dilated 3x3 convolutions, summed, then BN + ReLU."""

    def __init__(self, channels: int, dilations: tuple[int, ...]):
        super().__init__()
        self.branches = nn.ModuleList(
            nn.Conv2d(channels, channels, 3, padding=d, dilation=d, bias=False)
            for d in dilations)
        self.post = nn.Sequential(nn.BatchNorm2d(channels), nn.ReLU(inplace=True))

    def forward(self, x):
        summed = self.branches[0](x)
        for branch in self.branches[1:]:
            summed = summed + branch(x)
        return self.post(summed)


class HourglassNet(nn.Module):
    def __init__(self, spec: HourglassSpec | None = None):
        super().__init__()
        self.spec = spec or HourglassSpec()
        chans = self.spec.encoder_channels
        if len(chans) < 1:
            raise ValueError("need at least one encoder level")

        enc = []
        cin = self.spec.in_channels
        for c in chans:
            enc.append(conv_block(cin, c, stride=2))
            cin = c
        self.encoder = nn.ModuleList(enc)
        self.middle = DilatedMiddle(chans[-1], self.spec.dilations)

        dec = []
        dec_channels = list(reversed(chans[:-1])) + [chans[0]]
        cin = chans[-1]
        for c in dec_channels:
            dec.append(conv_block(cin, c))
            cin = c
        self.decoder = nn.ModuleList(dec)
        self.upsample = nn.Upsample(scale_factor=2, mode="nearest")
        self.head = nn.Conv2d(dec_channels[-1], self.spec.out_channels, 1)

    def forward(self, x):
        h, w = x.shape[-2:]
        s = self.spec.stride
        if h % s or w % s:
            raise ValueError(f"input size {h}x{w} must be a multiple of {s}")
        skips = []
        for block in self.encoder:
            x = block(x)
            skips.append(x)
        x = self.middle(x)
        # additive skips: decoder level k lands on the resolution of
        # encoder level -(k+2); the final level reaches full resolution,
        # where no encoder feature exists
        for k, block in enumerate(self.decoder):
            x = block(self.upsample(x))
            skip_idx = len(skips) - 2 - k
            if skip_idx >= 0:
                x = x + skips[skip_idx]
        return torch.sigmoid(self.head(x))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

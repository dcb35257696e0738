"""Multi-scale patch discriminators with feature taps."""

from __future__ import annotations

import torch.nn.functional as F
from torch import Tensor, nn


class PatchDiscriminator(nn.Module):
    """Four stride-2 convs with LeakyReLU, then a 1-channel patch projection.

    forward returns (logits, features) where features holds the activation
    after every LeakyReLU, one entry per downsampling layer.
    """

    def __init__(self, base_channels: int = 32) -> None:
        super().__init__()
        c = base_channels
        widths = [3, c, c * 2, c * 4, c * 8]
        self.stages = nn.ModuleList(
            nn.Conv2d(widths[i], widths[i + 1], 4, stride=2, padding=1) for i in range(4)
        )
        self.project = nn.Conv2d(widths[-1], 1, 3, padding=1)

    def forward(self, x: Tensor) -> tuple[Tensor, list[Tensor]]:
        features = []
        y = x
        for conv in self.stages:
            y = F.leaky_relu(conv(y), 0.2)
            features.append(y)
        return self.project(y), features


def image_pyramid(x: Tensor, n_scales: int) -> list[Tensor]:
    """Downsamples by factors of 2 per scale: [x, x/2, x/4, ...]."""
    levels = [x]
    for _ in range(n_scales - 1):
        levels.append(F.avg_pool2d(levels[-1], 2))
    return levels


class MultiScaleDiscriminator(nn.Module):
    """Identical patch discriminators applied to an image pyramid."""

    def __init__(self, n_scales: int = 3, base_channels: int = 32) -> None:
        super().__init__()
        if n_scales < 1:
            raise ValueError(f"n_scales must be at least 1, got {n_scales}")
        self.n_scales = n_scales
        self.scales = nn.ModuleList(PatchDiscriminator(base_channels) for _ in range(n_scales))

    def forward(self, x: Tensor) -> tuple[list[Tensor], list[list[Tensor]]]:
        """Returns per-scale patch logits and per-scale feature lists."""
        h, w = x.shape[-2:]
        pool = 2 ** (self.n_scales - 1)
        if h % pool or w % pool:
            raise ValueError(f"input size {h}x{w} is not divisible by {pool}")
        # The deepest level must survive four stride-2 convs with a patch left.
        if min(h, w) // pool < 16:
            raise ValueError(
                f"input size {h}x{w} leaves the deepest of {self.n_scales} "
                "scales below the 16 pixels its convs need"
            )
        logits = []
        features = []
        for level, disc in zip(image_pyramid(x, self.n_scales), self.scales):
            patch, taps = disc(level)
            logits.append(patch)
            features.append(taps)
        return logits, features

"""Attention building blocks for the refinement network."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import Tensor, nn

BLOCK_MODES = ("encode", "latent", "decode")


@dataclass
class AttentionBlockOutput:
    """Intermediate tensors of one attention block.

    attention entries are sigmoid outputs, strictly inside (0, 1) for any
    finite pre-activation. output recomposes as shortcut + attention * features.
    """

    features: Tensor
    attention: Tensor
    output: Tensor


class PreActConvBlock(nn.Module):
    """Pre-activation conv block: channelwise PReLU, then a 3x3 convolution."""

    def __init__(self, in_channels: int, out_channels: int, stride: int = 1) -> None:
        super().__init__()
        self.activation = nn.PReLU(in_channels)
        self.conv = nn.Conv2d(in_channels, out_channels, 3, stride=stride, padding=1)

    def forward(self, x: Tensor) -> Tensor:
        return self.conv(self.activation(x))


class Hourglass(nn.Module):
    """Bottom-up top-down module with a skip connection at every level.

    Input height and width must be divisible by 2**depth so the nearest
    upsampling reconstructs the original grid exactly.
    """

    def __init__(self, channels: int, depth: int) -> None:
        super().__init__()
        if depth < 1:
            raise ValueError(f"hourglass depth must be at least 1, got {depth}")
        self.depth = depth
        self.skip = PreActConvBlock(channels, channels)
        self.down = PreActConvBlock(channels, channels, stride=2)
        if depth > 1:
            self.inner: nn.Module = Hourglass(channels, depth - 1)
        else:
            self.inner = PreActConvBlock(channels, channels)
        self.up = PreActConvBlock(channels, channels)

    def forward(self, x: Tensor) -> Tensor:
        h, w = x.shape[-2:]
        if h % 2 or w % 2:
            raise ValueError(f"hourglass input size {h}x{w} is not divisible by 2")
        skip = self.skip(x)
        y = self.down(x)
        y = self.inner(y)
        y = F.interpolate(y, scale_factor=2, mode="nearest")
        return self.up(y) + skip


class AttentionUnit(nn.Module):
    """Hourglass followed by a conv layer and a sigmoid, producing the map."""

    def __init__(self, channels: int, hourglass_depth: int = 2) -> None:
        super().__init__()
        self.hourglass = Hourglass(channels, hourglass_depth)
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, features: Tensor) -> Tensor:
        return torch.sigmoid(self.conv(self.hourglass(features)))


class AttentionBlock(nn.Module):
    """One encode, latent, or decode attention block.

    The feature unit is two pre-activation conv blocks; encode blocks stride
    the second one to halve resolution, decode blocks nearest-upsample the
    input first, latent blocks keep resolution. The attention unit reads the
    feature-unit output. The shortcut is a conv with the same stride, so
    output = shortcut(in) + attention * features at the feature resolution.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        mode: str,
        hourglass_depth: int = 2,
    ) -> None:
        super().__init__()
        if mode not in BLOCK_MODES:
            raise ValueError(f"mode must be one of {BLOCK_MODES}, got {mode!r}")
        self.mode = mode
        stride = 2 if mode == "encode" else 1
        self.feature_first = PreActConvBlock(in_channels, out_channels)
        self.feature_second = PreActConvBlock(out_channels, out_channels, stride=stride)
        self.attention_unit = AttentionUnit(out_channels, hourglass_depth)
        self.shortcut = nn.Conv2d(in_channels, out_channels, 3, stride=stride, padding=1)

    def _pre(self, x: Tensor) -> Tensor:
        if self.mode == "decode":
            return F.interpolate(x, scale_factor=2, mode="nearest")
        return x

    def forward_detailed(self, x: Tensor) -> AttentionBlockOutput:
        pre = self._pre(x)
        features = self.feature_second(self.feature_first(pre))
        attention = self.attention_unit(features)
        output = self.shortcut(pre) + attention * features
        return AttentionBlockOutput(features=features, attention=attention, output=output)

    def forward(self, x: Tensor) -> Tensor:
        return self.forward_detailed(x).output

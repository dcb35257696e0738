"""Encoder-decoder refinement network assembled from attention blocks."""

from __future__ import annotations

import torch
from torch import Tensor, nn

from .blocks import AttentionBlock
from .config import RefinementConfig


class RefinementNet(nn.Module):
    """Maps a 3-channel intermediate image to a refined 3-channel image.

    Encode blocks halve resolution and double channels down to the
    bottleneck, latent blocks run at the bottleneck, decode blocks mirror
    the encoder back up. The head sigmoid keeps outputs in [0, 1].
    """

    def __init__(self, cfg: RefinementConfig) -> None:
        super().__init__()
        self.cfg = cfg
        c = cfg.base_channels
        depth = cfg.hourglass_depth
        self.stem = nn.Conv2d(3, c, 3, padding=1)
        encoders = []
        for j in range(cfg.n_eab):
            encoders.append(AttentionBlock(c << j, c << (j + 1), "encode", depth))
        self.encoders = nn.ModuleList(encoders)
        bottleneck = cfg.bottleneck_channels
        self.latents = nn.ModuleList(
            AttentionBlock(bottleneck, bottleneck, "latent", depth) for _ in range(cfg.n_lab)
        )
        decoders = []
        for j in reversed(range(cfg.n_dab)):
            decoders.append(AttentionBlock(c << (j + 1), c << j, "decode", depth))
        self.decoders = nn.ModuleList(decoders)
        self.head = nn.Conv2d(c, 3, 3, padding=1)

    def _check_input(self, x: Tensor) -> None:
        if x.ndim != 4 or x.shape[1] != 3:
            raise ValueError(f"expected a (B, 3, H, W) tensor, got shape {tuple(x.shape)}")
        h, w = x.shape[-2:]
        # Every resolution the attention units see must survive the hourglass.
        factor = (2 ** self.cfg.n_eab) * (2 ** self.cfg.hourglass_depth)
        if h % factor or w % factor:
            raise ValueError(f"input size {h}x{w} is not divisible by {factor}")

    def forward(self, x: Tensor) -> Tensor:
        self._check_input(x)
        y = self.stem(x)
        for block in self.encoders:
            y = block(y)
        for block in self.latents:
            y = block(y)
        for block in self.decoders:
            y = block(y)
        return torch.sigmoid(self.head(y))


def build_refinement_net(cfg: RefinementConfig) -> RefinementNet:
    """Builds the network, rejecting configs whose size cannot reach the bottleneck."""
    if cfg.bottleneck_size % (2 ** cfg.hourglass_depth):
        raise ValueError(
            f"bottleneck size {cfg.bottleneck_size} is not divisible by "
            f"2^{cfg.hourglass_depth} required by the attention hourglass"
        )
    return RefinementNet(cfg)

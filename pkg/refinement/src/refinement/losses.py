"""Loss suite for the refinement trainer."""

from __future__ import annotations

import warnings

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from .config import RefinementConfig


def _patch_mean(logits: Tensor) -> Tensor:
    """Reads a patch-logit map as one scalar per image."""
    return logits.flatten(1).mean(dim=1)


def pixel_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean over the batch of per-image unnormalized l1 distances."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return (pred - target).abs().flatten(1).sum(dim=1).mean()


def generator_adv_loss(d_fake: list[Tensor], n_scales: int = 3) -> Tensor:
    """Negated sum of discriminator scores over scales, averaged over the batch."""
    if len(d_fake) != n_scales:
        raise ValueError(f"expected {n_scales} discriminator scales, got {len(d_fake)}")
    per_image = torch.stack([_patch_mean(logits) for logits in d_fake]).sum(dim=0)
    return -per_image.mean()


def feature_matching_loss(
    fake_features: list[list[Tensor]],
    real_features: list[list[Tensor]],
    n_scales: int = 3,
) -> Tensor:
    """Per-layer l1 feature distance, each layer normalized by its element count."""
    if len(fake_features) != n_scales or len(real_features) != n_scales:
        raise ValueError(
            f"expected {n_scales} discriminator scales, got "
            f"{len(fake_features)} fake and {len(real_features)} real"
        )
    total = None
    for scale, (fake_layers, real_layers) in enumerate(zip(fake_features, real_features)):
        if len(fake_layers) != len(real_layers):
            raise ValueError(
                f"scale {scale} has {len(fake_layers)} fake layers "
                f"but {len(real_layers)} real layers"
            )
        for fake, real in zip(fake_layers, real_layers):
            if fake.shape != real.shape:
                raise ValueError(
                    f"feature shape mismatch at scale {scale}: "
                    f"{tuple(fake.shape)} vs {tuple(real.shape)}"
                )
            per_sample = fake[0].numel()
            term = (fake - real).abs().flatten(1).sum(dim=1) / per_sample
            total = term if total is None else total + term
    if total is None:
        raise ValueError("no feature layers to match")
    return total.mean()


class TappedBackbone(nn.Module):
    """Pretrained classification trunk reporting activations at tapped layers."""

    def __init__(self, trunk: nn.Sequential, taps: tuple[int, ...]) -> None:
        super().__init__()
        self.trunk = trunk
        self.taps = taps
        self.eval()
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, x: Tensor) -> list[Tensor]:
        features = []
        y = x
        for index, layer in enumerate(self.trunk):
            y = layer(y)
            if index in self.taps:
                features.append(y)
            if features and index >= max(self.taps):
                break
        return features


def build_feature_extractor(n_taps: int = 3) -> TappedBackbone | None:
    """VGG19 tapped at the first activation of each of the first n_taps blocks.

    Returns None when torchvision or its pretrained weights are unavailable,
    leaving the caller to drop the perceptual term.
    """
    try:
        from torchvision import models

        trunk = models.vgg19(weights=models.VGG19_Weights.IMAGENET1K_V1).features
    except Exception as exc:
        warnings.warn(f"perceptual feature extractor unavailable: {exc}", stacklevel=2)
        return None
    # Tap the first activation of each block; pools mark block boundaries.
    taps = []
    block_open = True
    for index, layer in enumerate(trunk):
        if isinstance(layer, nn.ReLU) and block_open:
            taps.append(index)
            block_open = False
        if isinstance(layer, nn.MaxPool2d):
            block_open = True
        if len(taps) == n_taps:
            break
    return TappedBackbone(trunk, tuple(taps))


def perceptual_loss(pred: Tensor, target: Tensor, extractor: nn.Module) -> Tensor:
    """Per-layer normalized l1 distance between extractor features."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    pred_features = extractor(pred)
    with torch.no_grad():
        target_features = extractor(target)
    total = None
    for fake, real in zip(pred_features, target_features):
        per_sample = fake[0].numel()
        term = (fake - real).abs().flatten(1).sum(dim=1) / per_sample
        total = term if total is None else total + term
    if total is None:
        raise ValueError("extractor produced no feature layers")
    return total.mean()


def discriminator_hinge_loss(
    d_real: list[Tensor], d_fake: list[Tensor], n_scales: int = 3
) -> Tensor:
    """Hinge objective for the discriminators, summed over scales."""
    if len(d_real) != n_scales or len(d_fake) != n_scales:
        raise ValueError(
            f"expected {n_scales} discriminator scales, got "
            f"{len(d_real)} real and {len(d_fake)} fake"
        )
    total = None
    for real, fake in zip(d_real, d_fake):
        term = _patch_mean(F.relu(1.0 - real)) + _patch_mean(F.relu(1.0 + fake))
        total = term if total is None else total + term
    return total.mean()


def weighted_total(
    cfg: RefinementConfig, l_pix: Tensor, l_adv: Tensor, l_fm: Tensor, l_per: Tensor
) -> Tensor:
    """Weighted sum of the four generator terms."""
    return (
        cfg.lambda_pix * l_pix
        + cfg.lambda_adv * l_adv
        + cfg.lambda_fm * l_fm
        + cfg.lambda_per * l_per
    )

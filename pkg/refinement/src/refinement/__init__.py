"""Adversarial refinement trainer for exported intermediate images."""

from .blocks import (
    AttentionBlock,
    AttentionBlockOutput,
    AttentionUnit,
    Hourglass,
    PreActConvBlock,
)
from .config import FULL_SCALE, RefinementConfig
from .data import TripletDataset, load_manifest
from .discriminator import MultiScaleDiscriminator, PatchDiscriminator, image_pyramid
from .losses import (
    TappedBackbone,
    build_feature_extractor,
    discriminator_hinge_loss,
    feature_matching_loss,
    generator_adv_loss,
    perceptual_loss,
    pixel_loss,
    weighted_total,
)
from .model import RefinementNet, build_refinement_net
from .train import CSV_COLUMNS, TrainResult, save_checkpoint, train_refinement

__version__ = "0.1.0"

__all__ = [
    "AttentionBlock",
    "AttentionBlockOutput",
    "AttentionUnit",
    "CSV_COLUMNS",
    "FULL_SCALE",
    "Hourglass",
    "MultiScaleDiscriminator",
    "PatchDiscriminator",
    "PreActConvBlock",
    "RefinementConfig",
    "RefinementNet",
    "TappedBackbone",
    "TrainResult",
    "TripletDataset",
    "build_feature_extractor",
    "build_refinement_net",
    "discriminator_hinge_loss",
    "feature_matching_loss",
    "generator_adv_loss",
    "image_pyramid",
    "load_manifest",
    "perceptual_loss",
    "pixel_loss",
    "save_checkpoint",
    "train_refinement",
    "weighted_total",
    "__version__",
]

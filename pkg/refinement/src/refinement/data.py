"""Loader for the intermediate/target PNG triplets exported upstream."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch import Tensor


def load_manifest(manifest_path: Path | str) -> dict:
    """Reads and validates the triplet manifest JSON."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{manifest_path} is not valid JSON: {exc}") from exc
    triplets = manifest.get("triplets")
    if not isinstance(triplets, list):
        raise ValueError(f"{manifest_path} has no triplet list")
    if not triplets:
        raise ValueError(f"{manifest_path} lists no triplets")
    for entry in triplets:
        for key in ("intermediate", "target"):
            if key not in entry:
                raise ValueError(f"manifest triplet {entry!r} is missing {key!r}")
    return manifest


def _load_png(path: Path, image_size: int | None) -> Tensor:
    """Loads a PNG as a float32 (3, H, W) tensor in [0, 1].

    Grayscale files are expanded to three channels so either export kind
    feeds the same network; sizes other than image_size are resized.
    """
    with Image.open(path) as img:
        img = img.convert("RGB")
        if image_size is not None and img.size != (image_size, image_size):
            img = img.resize((image_size, image_size), Image.BILINEAR)
        array = np.asarray(img, dtype=np.float32) / 255.0
    return torch.from_numpy(array).permute(2, 0, 1).contiguous()


class TripletDataset:
    """In-memory (intermediate, target) pairs from one manifest.

    Paths in the manifest are relative to the manifest's directory. The
    intermediate image is the generator input, the target is the real image
    the discriminators see.
    """

    def __init__(self, manifest_path: Path | str, image_size: int | None = None) -> None:
        manifest_path = Path(manifest_path)
        self.manifest = load_manifest(manifest_path)
        root = manifest_path.parent
        inputs = []
        targets = []
        for entry in self.manifest["triplets"]:
            inputs.append(_load_png(root / entry["intermediate"], image_size))
            targets.append(_load_png(root / entry["target"], image_size))
        self.inputs = torch.stack(inputs)
        self.targets = torch.stack(targets)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def __getitem__(self, index: int) -> tuple[Tensor, Tensor]:
        return self.inputs[index], self.targets[index]

    def batch(self, indices) -> tuple[Tensor, Tensor]:
        return self.inputs[indices], self.targets[indices]

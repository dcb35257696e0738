"""Shared fixtures: a synthetic triplet manifest and small configs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from refinement import RefinementConfig


def write_toy_manifest(root: Path, count: int = 8, size: int = 64, seed: int = 7) -> Path:
    """Writes structured triplets where the target adds a local bright patch.

    Mirrors the upstream export layout: per-pair input/intermediate/target
    PNGs plus manifest.json, all synthesized here so these tests stand alone.
    """
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1)
    dist = (np.arange(size)[:, None] - size * 0.6) ** 2 + (
        np.arange(size)[None, :] - size * 0.5
    ) ** 2
    mask = dist < (size * 0.16) ** 2
    triplets = []
    for i in range(count):
        base = np.stack(
            [
                0.3 + 0.4 * yy + 0.1 * np.sin(2 * np.pi * xx * (i + 1) / count),
                0.4 + 0.3 * xx,
                0.5 + 0.2 * np.cos(2 * np.pi * yy),
            ],
            axis=-1,
        )
        base = base + rng.normal(0.0, 0.02, base.shape)
        intermediate = np.clip(base, 0.0, 1.0)
        target = intermediate.copy()
        target[mask] = np.clip(target[mask] + 0.25, 0.0, 1.0)
        files = {}
        for kind, array in (
            ("input", intermediate),
            ("intermediate", intermediate),
            ("target", target),
        ):
            name = f"pair-{i:03d}_{kind}.png"
            Image.fromarray((array * 255).round().astype(np.uint8)).save(root / name)
            files[kind] = name
        triplets.append(files)
    manifest = {"task": "toy", "r": 5, "lambda_reg": 1.0, "triplets": triplets}
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory) -> Path:
    return write_toy_manifest(tmp_path_factory.mktemp("toy") / "export")


@pytest.fixture
def small_cfg() -> RefinementConfig:
    # Thin enough for per-test training, still the full 64x64 geometry.
    return RefinementConfig(base_channels=8, n_lab=2, lambda_per=0.0)

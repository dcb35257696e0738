"""Manifest and triplet loading."""

from __future__ import annotations

import json

import numpy as np
import pytest
import torch
from PIL import Image

from refinement import TripletDataset, load_manifest

from conftest import write_toy_manifest


def test_load_manifest_happy_path(toy_manifest):
    manifest = load_manifest(toy_manifest)
    assert len(manifest["triplets"]) == 8
    assert manifest["task"] == "toy"


def test_missing_triplet_list(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"task": "x"}))
    with pytest.raises(ValueError, match="triplet"):
        load_manifest(path)


def test_empty_triplet_list(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"triplets": []}))
    with pytest.raises(ValueError, match="no triplets"):
        load_manifest(path)


def test_invalid_json(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{not json")
    with pytest.raises(ValueError, match="JSON"):
        load_manifest(path)


def test_triplet_missing_key(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"triplets": [{"input": "a.png", "target": "b.png"}]}))
    with pytest.raises(ValueError, match="intermediate"):
        load_manifest(path)


def test_dataset_shapes_and_range(toy_manifest):
    ds = TripletDataset(toy_manifest, image_size=64)
    assert len(ds) == 8
    assert ds.inputs.shape == (8, 3, 64, 64)
    assert ds.targets.shape == (8, 3, 64, 64)
    assert ds.inputs.dtype == torch.float32
    assert float(ds.inputs.min()) >= 0.0
    assert float(ds.inputs.max()) <= 1.0


def test_dataset_pairs_differ_where_target_was_edited(toy_manifest):
    ds = TripletDataset(toy_manifest, image_size=64)
    intermediate, target = ds[0]
    assert not torch.equal(intermediate, target)
    # The synthetic edit only brightens, never darkens.
    assert float((target - intermediate).min()) >= -1.0 / 255.0


def test_dataset_resizes_when_asked(tmp_path):
    write_toy_manifest(tmp_path / "export", count=2, size=32)
    ds = TripletDataset(tmp_path / "export" / "manifest.json", image_size=64)
    assert ds.inputs.shape == (2, 3, 64, 64)


def test_grayscale_png_expands_to_three_channels(tmp_path):
    gray = Image.fromarray((np.arange(64 * 64) % 256).astype(np.uint8).reshape(64, 64))
    gray.save(tmp_path / "g_intermediate.png")
    gray.save(tmp_path / "g_target.png")
    manifest = {
        "triplets": [{"intermediate": "g_intermediate.png", "target": "g_target.png"}]
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    ds = TripletDataset(tmp_path / "manifest.json", image_size=64)
    assert ds.inputs.shape == (1, 3, 64, 64)
    assert torch.equal(ds.inputs[0, 0], ds.inputs[0, 1])


def test_pixel_values_match_png_bytes(tmp_path):
    array = np.zeros((64, 64, 3), dtype=np.uint8)
    array[0, 0] = (255, 128, 0)
    Image.fromarray(array).save(tmp_path / "a_intermediate.png")
    Image.fromarray(array).save(tmp_path / "a_target.png")
    manifest = {
        "triplets": [{"intermediate": "a_intermediate.png", "target": "a_target.png"}]
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    ds = TripletDataset(tmp_path / "manifest.json", image_size=64)
    assert float(ds.inputs[0, 0, 0, 0]) == pytest.approx(1.0)
    assert float(ds.inputs[0, 1, 0, 0]) == pytest.approx(128 / 255)
    assert float(ds.inputs[0, 2, 0, 0]) == 0.0


def test_batch_indexing(toy_manifest):
    ds = TripletDataset(toy_manifest, image_size=64)
    inputs, targets = ds.batch(torch.tensor([0, 3]))
    assert inputs.shape == (2, 3, 64, 64)
    assert torch.equal(inputs[1], ds.inputs[3])
    assert torch.equal(targets[0], ds.targets[0])


def test_missing_file_raises(tmp_path):
    manifest = {"triplets": [{"intermediate": "gone.png", "target": "gone.png"}]}
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(FileNotFoundError):
        TripletDataset(tmp_path / "manifest.json")

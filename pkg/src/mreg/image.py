"""Image containers, paired-dataset loading, and receptive-field extraction.

Images are stored channel-planar as float64 arrays of shape
``(channels, height, width)`` with every intensity in [0, 1].  8-bit PNG
files are mapped to [0, 1] on load and back with rounding on save, so a
save/load round trip moves each intensity by at most 1/255.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image as _PILImage
from PIL import UnidentifiedImageError

__all__ = [
    "Image",
    "PairedDataset",
    "PatchVector",
    "load_paired_dataset",
    "extract_receptive_field",
]


@dataclass(frozen=True)
class Image:
    """A channel-planar image: ``data`` has shape (channels, height, width)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 3:
            raise ValueError(f"image data must be (channels, height, width), got shape {data.shape}")
        if data.shape[0] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {data.shape[0]}")
        if not np.isfinite(data).all():
            raise ValueError("image intensities must be finite")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("image intensities must lie in [0, 1]")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def geometry(self) -> tuple[int, int, int]:
        """(height, width, channels)."""
        return self.height, self.width, self.channels

    @classmethod
    def from_uint8(cls, array: np.ndarray) -> "Image":
        """Build from an 8-bit array, (H, W) grayscale or (H, W, 3) RGB."""
        arr = np.asarray(array)
        if arr.ndim == 2:
            arr = arr[None, :, :]
        elif arr.ndim == 3 and arr.shape[2] in (1, 3):
            arr = np.moveaxis(arr, 2, 0)
        else:
            raise ValueError(f"expected (H, W) or (H, W, C) uint8 array, got shape {arr.shape}")
        return cls(arr.astype(np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        """Quantize to 8 bits; returns (H, W) for grayscale, (H, W, 3) for RGB."""
        q = np.rint(np.clip(self.data, 0.0, 1.0) * 255.0).astype(np.uint8)
        if self.channels == 1:
            return q[0]
        return np.moveaxis(q, 0, 2)

    @classmethod
    def load_png(cls, path: Path | str) -> "Image":
        path = Path(path)
        try:
            with _PILImage.open(path) as im:
                if im.mode not in ("L", "RGB"):
                    raise ValueError(
                        f"unsupported image mode {im.mode!r} in {path.name}; expected 8-bit grayscale or RGB"
                    )
                arr = np.asarray(im, dtype=np.uint8)
        except UnidentifiedImageError as exc:
            raise ValueError(f"undecodable image file: {path.name}") from exc
        return cls.from_uint8(arr)

    def save_png(self, path: Path | str) -> None:
        path = Path(path)
        arr = self.to_uint8()
        mode = "L" if arr.ndim == 2 else "RGB"
        _PILImage.fromarray(arr, mode=mode).save(path, format="PNG")


@dataclass(frozen=True)
class PairedDataset:
    """Aligned (input, target) image pairs for one translation task.

    All images share one geometry; there is at least one pair.  ``names``
    identifies pairs in reports and exported files and defaults to the
    zero-padded pair index.
    """

    pairs: tuple[tuple[Image, Image], ...]
    task_name: str
    names: tuple[str, ...] = ()

    def __post_init__(self):
        pairs = tuple((a, b) for a, b in self.pairs)
        if len(pairs) == 0:
            raise ValueError("a paired dataset needs at least one pair")
        geom = pairs[0][0].geometry
        for idx, (inp, tgt) in enumerate(pairs):
            if inp.geometry != geom or tgt.geometry != geom:
                raise ValueError(
                    f"dimension mismatch in pair {idx}: expected {geom}, "
                    f"got input {inp.geometry} / target {tgt.geometry}"
                )
        names = tuple(self.names) if self.names else tuple(f"pair-{i:03d}" for i in range(len(pairs)))
        if len(names) != len(pairs):
            raise ValueError("names must match pair count")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def geometry(self) -> tuple[int, int, int]:
        return self.pairs[0][0].geometry

    def inputs_array(self) -> np.ndarray:
        """Stack inputs as (N, channels, height, width) float64."""
        return np.stack([inp.data for inp, _ in self.pairs])

    def targets_array(self) -> np.ndarray:
        """Stack targets as (N, channels, height, width) float64."""
        return np.stack([tgt.data for _, tgt in self.pairs])

    def subset(self, indices: Sequence[int], task_name: str | None = None) -> "PairedDataset":
        idx = list(indices)
        return PairedDataset(
            pairs=tuple(self.pairs[i] for i in idx),
            task_name=task_name or self.task_name,
            names=tuple(self.names[i] for i in idx),
        )


@dataclass(frozen=True)
class PatchVector:
    """An r*r receptive-field window flattened row-major, plus its center."""

    values: np.ndarray
    center: tuple[int, int]

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 1:
            raise ValueError("patch values must be a flat vector")
        r = int(round(len(values) ** 0.5))
        if r * r != len(values):
            raise ValueError(f"patch length {len(values)} is not a perfect square")
        object.__setattr__(self, "values", values)

    @property
    def r(self) -> int:
        return int(round(len(self.values) ** 0.5))


def _list_image_files(directory: Path) -> list[Path]:
    if not directory.is_dir():
        raise ValueError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")


def load_paired_dataset(
    input_dir: Path | str,
    target_dir: Path | str,
    task_name: str | None = None,
    manifest: Path | str | None = None,
) -> PairedDataset:
    """Load aligned pairs from two directories of PNG files.

    Pairing is by sorted filename.  A manifest (JSON list of
    ``{"input": ..., "target": ...}`` entries) overrides the sorted-name
    convention.  Mismatched counts, mismatched dimensions, and undecodable
    files are all reported with the offending filename.
    """
    input_dir = Path(input_dir)
    target_dir = Path(target_dir)

    if manifest is not None:
        entries = json.loads(Path(manifest).read_text())
        if not isinstance(entries, list) or not all(
            isinstance(e, dict) and "input" in e and "target" in e for e in entries
        ):
            raise ValueError(f"manifest must be a JSON list of {{input, target}} entries: {manifest}")
        input_files = [input_dir / e["input"] for e in entries]
        target_files = [target_dir / e["target"] for e in entries]
    else:
        input_files = _list_image_files(input_dir)
        target_files = _list_image_files(target_dir)
        if len(input_files) != len(target_files):
            raise ValueError(
                f"pair count mismatch: {len(input_files)} files in {input_dir} "
                f"vs {len(target_files)} in {target_dir}"
            )

    pairs = []
    names = []
    geom = None
    for in_path, tgt_path in zip(input_files, target_files):
        inp = Image.load_png(in_path)
        tgt = Image.load_png(tgt_path)
        if geom is None:
            geom = inp.geometry
        for path, img in ((in_path, inp), (tgt_path, tgt)):
            if img.geometry != geom:
                raise ValueError(
                    f"dimension mismatch: {path.name} has geometry {img.geometry}, expected {geom}"
                )
        pairs.append((inp, tgt))
        names.append(in_path.stem)

    if not pairs:
        raise ValueError(f"no image pairs found under {input_dir} and {target_dir}")

    name = task_name or f"{input_dir.name}->{target_dir.name}"
    return PairedDataset(pairs=tuple(pairs), task_name=name, names=tuple(names))


def extract_receptive_field(
    img: Image, channel: int, center: tuple[int, int], r: int
) -> PatchVector:
    """Extract the r*r window centered at ``center``, flattened row-major.

    Coordinates that fall outside the image are clamped to the nearest edge
    (replicate padding), so border patches repeat edge intensities instead
    of introducing artificial zeros.
    """
    if r < 1 or r % 2 == 0:
        raise ValueError(f"receptive field size must be odd and >= 1, got {r}")
    if not 0 <= channel < img.channels:
        raise ValueError(f"channel {channel} out of range for {img.channels}-channel image")
    row, col = center
    if not (0 <= row < img.height and 0 <= col < img.width):
        raise ValueError(f"center {center} outside image of size {img.height}x{img.width}")

    half = r // 2
    rows = np.clip(np.arange(row - half, row + half + 1), 0, img.height - 1)
    cols = np.clip(np.arange(col - half, col + half + 1), 0, img.width - 1)
    values = img.data[channel][np.ix_(rows, cols)].ravel()
    return PatchVector(values=values, center=(row, col))

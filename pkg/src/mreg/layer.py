"""The trained per-pixel mapping for one translation task.

A layer holds, for every (channel, row, col), the r*r receptive-field
weights and bias produced by the closed-form ridge solve.  Training is
deterministic; applying the layer is the affine map per pixel followed by
clamping to [0, 1].

Layer file format (all little-endian):

    magic     4 bytes  b"MREG"
    version   u16      currently 1
    name_len  u16      followed by that many UTF-8 bytes (task name)
    height    u32
    width     u32
    channels  u32
    r         u16
    lambda    f64
    payload   channels*height*width solutions in [channel][row][col]
              order, each r^2 weight f64s followed by the bias f64
    crc32     u32      over every preceding byte
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .image import Image, PairedDataset
from .kernels import get_backend, resolve_threads
from .solver import RidgeConfig, SolverError

__all__ = [
    "ExpressionLayer",
    "LayerFormatError",
    "train_expression_layer",
    "apply_expression_layer",
    "save_layer",
    "load_layer",
    "export_intermediates",
]

_MAGIC = b"MREG"
_FORMAT_VERSION = 1
_HEADER_TAIL = struct.Struct("<IIIHd")  # height, width, channels, r, lambda


class LayerFormatError(ValueError):
    """A layer file is malformed, truncated, or fails its checksum."""


@dataclass(frozen=True)
class ExpressionLayer:
    """Per-pixel weights (channels, height, width, r^2) and biases (channels, height, width)."""

    task_name: str
    r: int
    lambda_reg: float
    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        biases = np.ascontiguousarray(np.asarray(self.biases, dtype=np.float64))
        if self.r < 1 or self.r % 2 == 0:
            raise ValueError(f"receptive field size must be odd and >= 1, got {self.r}")
        if weights.ndim != 4 or biases.ndim != 3:
            raise ValueError(
                f"expected weights (C,H,W,r^2) and biases (C,H,W), got {weights.shape} / {biases.shape}"
            )
        if weights.shape[:3] != biases.shape or weights.shape[3] != self.r * self.r:
            raise ValueError(
                f"weight shape {weights.shape} inconsistent with biases {biases.shape} and r={self.r}"
            )
        if not (np.isfinite(weights).all() and np.isfinite(biases).all()):
            raise ValueError("layer solutions must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def channels(self) -> int:
        return self.weights.shape[0]

    @property
    def height(self) -> int:
        return self.weights.shape[1]

    @property
    def width(self) -> int:
        return self.weights.shape[2]

    @property
    def geometry(self) -> tuple[int, int, int]:
        """(height, width, channels), matching the training dataset."""
        return self.height, self.width, self.channels

    def solution_at(self, channel: int, row: int, col: int) -> tuple[np.ndarray, float]:
        return self.weights[channel, row, col], float(self.biases[channel, row, col])


def train_expression_layer(
    ds: PairedDataset,
    cfg: RidgeConfig,
    threads: int | None = None,
    backend: str | None = None,
    progress: Callable[[int, int, int, int], None] | None = None,
) -> ExpressionLayer:
    """Solve the ridge system of every (channel, pixel) of the dataset.

    ``progress``, when given, is invoked after each finished row as
    ``progress(channel, channels, row, height)``.  Solver failures are
    annotated with the offending (channel, pixel).
    """
    height, width, channels = ds.geometry
    kernel = get_backend(backend)
    n_threads = resolve_threads(threads)
    inputs = ds.inputs_array()
    targets = ds.targets_array()
    penalty = cfg.penalty
    k = cfg.r * cfg.r

    weights = np.empty((channels, height, width, k))
    biases = np.empty((channels, height, width))
    for channel in range(channels):
        in_plane = np.ascontiguousarray(inputs[:, channel])
        tgt_plane = np.ascontiguousarray(targets[:, channel])
        for row in range(height):
            failed = kernel.train_row(
                in_plane, tgt_plane, row, cfg.r, penalty,
                n_threads, weights[channel, row], biases[channel, row],
            )
            if failed >= 0:
                raise SolverError(
                    f"pixel solve failed at channel={channel}, pixel=({row}, {failed})"
                )
            if progress is not None:
                progress(channel, channels, row, height)
    return ExpressionLayer(
        task_name=ds.task_name,
        r=cfg.r,
        lambda_reg=cfg.lambda_reg,
        weights=weights,
        biases=biases,
    )


def apply_expression_layer(
    layer: ExpressionLayer,
    img: Image,
    threads: int | None = None,
    backend: str | None = None,
) -> Image:
    """Map an image through the layer: per-pixel affine, clamped to [0, 1]."""
    if img.geometry != layer.geometry:
        raise ValueError(
            f"layer geometry {layer.geometry} does not match image geometry {img.geometry}"
        )
    kernel = get_backend(backend)
    n_threads = resolve_threads(threads)
    out = np.empty((layer.channels, layer.height, layer.width))
    for channel in range(layer.channels):
        kernel.apply_plane(
            img.data[channel], layer.weights[channel], layer.biases[channel],
            layer.r, n_threads, out[channel],
        )
    return Image(out)


def save_layer(layer: ExpressionLayer, path: Path | str) -> None:
    """Write the layer in the versioned binary format with a trailing CRC32."""
    name_bytes = layer.task_name.encode("utf-8")
    if len(name_bytes) > 0xFFFF:
        raise ValueError("task name too long to serialize")
    parts = [
        _MAGIC,
        struct.pack("<H", _FORMAT_VERSION),
        struct.pack("<H", len(name_bytes)),
        name_bytes,
        _HEADER_TAIL.pack(layer.height, layer.width, layer.channels, layer.r, layer.lambda_reg),
    ]
    k = layer.r * layer.r
    solutions = np.empty((layer.channels, layer.height, layer.width, k + 1))
    solutions[..., :k] = layer.weights
    solutions[..., k] = layer.biases
    parts.append(solutions.astype("<f8").tobytes())
    body = b"".join(parts)
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def load_layer(path: Path | str) -> ExpressionLayer:
    """Read a layer file; inverse of save_layer, bit-exact on the weights."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != _MAGIC:
        raise LayerFormatError(f"not a layer file: {path}")
    if len(raw) < 8:
        raise LayerFormatError(f"truncated layer file: {path}")
    (version,) = struct.unpack_from("<H", raw, 4)
    if version != _FORMAT_VERSION:
        raise LayerFormatError(f"unsupported layer format version {version} in {path}")
    (name_len,) = struct.unpack_from("<H", raw, 6)
    offset = 8
    if len(raw) < offset + name_len + _HEADER_TAIL.size:
        raise LayerFormatError(f"truncated layer file: {path}")
    name_bytes = raw[offset : offset + name_len]
    offset += name_len
    height, width, channels, r, lambda_reg = _HEADER_TAIL.unpack_from(raw, offset)
    offset += _HEADER_TAIL.size

    k = r * r
    payload_len = channels * height * width * (k + 1) * 8
    expected_len = offset + payload_len + 4
    if len(raw) != expected_len:
        raise LayerFormatError(
            f"truncated layer file: {path} has {len(raw)} bytes, "
            f"header geometry implies {expected_len}"
        )
    (stored_crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(raw[:-4]) != stored_crc:
        raise LayerFormatError(f"layer file checksum mismatch: {path}")
    # Decode only after the CRC has vouched for the bytes; a corrupted name
    # must surface as a format error, not a unicode error.
    task_name = name_bytes.decode("utf-8")

    solutions = np.frombuffer(raw, dtype="<f8", count=channels * height * width * (k + 1), offset=offset)
    solutions = solutions.reshape(channels, height, width, k + 1).astype(np.float64)
    return ExpressionLayer(
        task_name=task_name,
        r=r,
        lambda_reg=lambda_reg,
        weights=solutions[..., :k].copy(),
        biases=solutions[..., k].copy(),
    )


def export_intermediates(
    layer: ExpressionLayer,
    ds: PairedDataset,
    out_dir: Path | str,
    threads: int | None = None,
) -> dict:
    """Write (input, intermediate, target) PNG triplets plus a JSON manifest.

    This is the hand-off consumed by the downstream refinement trainer:
    the manifest lists one triplet of filenames per pair, with the layer's
    task name, r, and lambda recorded alongside.
    """
    if ds.geometry != layer.geometry:
        raise ValueError(
            f"layer geometry {layer.geometry} does not match dataset geometry {ds.geometry}"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    triplets = []
    for name, (inp, tgt) in zip(ds.names, ds.pairs):
        intermediate = apply_expression_layer(layer, inp, threads=threads)
        files = {
            "input": f"{name}_input.png",
            "intermediate": f"{name}_intermediate.png",
            "target": f"{name}_target.png",
        }
        inp.save_png(out_dir / files["input"])
        intermediate.save_png(out_dir / files["intermediate"])
        tgt.save_png(out_dir / files["target"])
        triplets.append(files)
    manifest = {
        "task": layer.task_name,
        "r": layer.r,
        "lambda_reg": layer.lambda_reg,
        "triplets": triplets,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest

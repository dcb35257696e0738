"""Synthetic paired tasks and random systems for tests, benchmarks, and verify."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image import Image, PairedDataset
from .solver import PixelSystem

__all__ = ["smooth_random_image", "smile_mask", "make_smile_task", "make_random_system"]


def smooth_random_image(
    rng: np.random.Generator,
    height: int,
    width: int,
    channels: int = 1,
    low: float = 0.0,
    high: float = 1.0,
) -> Image:
    """A smooth random field per channel, rescaled into [low, high].

    Coarse noise upsampled with a spline gives face-like large-scale
    structure instead of per-pixel static.
    """
    planes = []
    for _ in range(channels):
        coarse = rng.random((max(2, height // 4), max(2, width // 4)))
        zoomed = ndimage.zoom(coarse, (height / coarse.shape[0], width / coarse.shape[1]), order=3)
        zoomed = zoomed[:height, :width]
        lo, hi = zoomed.min(), zoomed.max()
        span = hi - lo if hi > lo else 1.0
        planes.append(low + (zoomed - lo) / span * (high - low))
    return Image(np.stack(planes))


def smile_mask(height: int, width: int) -> np.ndarray:
    """A fixed mouth-arc-plus-eyes mask, scaled to the image size.

    Boolean (height, width); the marked region is the localized pattern a
    brightening task adds to its targets.
    """
    mask = np.zeros((height, width), dtype=bool)
    rows = np.arange(height)[:, None]
    cols = np.arange(width)[None, :]
    # Mouth: a downward-opening parabolic band in the lower third.
    x = (cols - (width - 1) / 2.0) / (width / 2.0)
    arc_center = 0.72 * height - 0.18 * height * (1.0 - x**2)
    mask |= np.abs(rows - arc_center) <= max(1.0, 0.09 * height)
    # Eyes: two square dots in the upper half.
    eye_row = int(0.3 * height)
    eye_half = max(1, int(0.08 * height))
    for eye_col in (int(0.3 * width), int(0.7 * width)):
        mask[eye_row - eye_half : eye_row + eye_half + 1, eye_col - eye_half : eye_col + eye_half + 1] = True
    return mask


def make_smile_task(
    n_pairs: int = 60,
    size: int = 16,
    channels: int = 1,
    noise_sigma: float = 0.02,
    boost: float = 0.5,
    seed: int = 0,
    task_name: str = "neutral->smile",
) -> PairedDataset:
    """Paired task: target = input brightened on a fixed smile mask, plus noise.

    Inputs stay in [0.05, 0.42] so the brightened region rarely clips; the
    additive pattern is identical across pairs, which a per-pixel affine
    layer can represent exactly.
    """
    rng = np.random.default_rng(seed)
    mask = smile_mask(size, size)
    pairs = []
    for _ in range(n_pairs):
        inp = smooth_random_image(rng, size, size, channels, low=0.05, high=0.42)
        tgt = inp.data + boost * mask
        tgt = tgt + rng.normal(0.0, noise_sigma, size=tgt.shape)
        pairs.append((inp, Image(np.clip(tgt, 0.0, 1.0))))
    return PairedDataset(pairs=tuple(pairs), task_name=task_name)


def make_random_system(
    rng: np.random.Generator, n_pairs: int, r: int, pixel: tuple[int, int] = (0, 0)
) -> PixelSystem:
    """A random dense patch system with intensities in [0, 1]."""
    return PixelSystem(
        X=rng.random((n_pairs, r * r)),
        t=rng.random(n_pairs),
        pixel=pixel,
        channel=0,
    )

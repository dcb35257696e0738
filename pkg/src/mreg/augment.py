"""Color augmentation for paired datasets.

Expands a dataset with hue/saturation/value-jittered copies to widen the
range of skin tones seen during training, while leaving geometry alone.
The same transform is applied to both images of a pair, and every
transform is a pure function of (seed, pair index, copy index), so
augmented datasets are reproducible pixel for pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image, PairedDataset

__all__ = [
    "AugmentSpec",
    "augment_pair",
    "augment_dataset",
    "apply_color_transform",
    "rgb_to_hsv",
    "hsv_to_rgb",
]


@dataclass(frozen=True)
class AugmentSpec:
    """Augmentation ranges, all symmetric around the identity transform.

    ``hue_shift_range`` is a half-width in degrees; the scale ranges are
    half-widths around 1.0 (0.3 means scales drawn from [0.7, 1.3]), and
    must stay below 1 so scales remain positive.
    """

    copies_per_pair: int = 10
    seed: int = 42
    hue_shift_range: float = 25.0
    saturation_scale_range: float = 0.3
    value_scale_range: float = 0.15

    def __post_init__(self):
        if self.copies_per_pair < 0:
            raise ValueError("copies_per_pair must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.hue_shift_range < 0:
            raise ValueError("hue_shift_range must be >= 0 degrees")
        for name in ("saturation_scale_range", "value_scale_range"):
            val = getattr(self, name)
            if not 0 <= val < 1:
                raise ValueError(f"{name} must lie in [0, 1) so scales stay positive")


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV on (..., 3) arrays in [0, 1]; hue in [0, 1)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    v = maxc

    safe_max = np.where(maxc == 0.0, 1.0, maxc)
    s = np.where(maxc == 0.0, 0.0, delta / safe_max)

    safe_delta = np.where(delta == 0.0, 1.0, delta)
    rc = (maxc - r) / safe_delta
    gc = (maxc - g) / safe_delta
    bc = (maxc - b) / safe_delta
    h = np.select(
        [delta == 0.0, r == maxc, g == maxc],
        [0.0, bc - gc, 2.0 + rc - bc],
        default=4.0 + gc - rc,
    )
    h = (h / 6.0) % 1.0
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB on (..., 3) arrays; inverse of rgb_to_hsv."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    r = np.select([i == 0, i == 1, i == 2, i == 3, i == 4], [v, q, p, p, t], default=v)
    g = np.select([i == 0, i == 1, i == 2, i == 3, i == 4], [t, v, v, q, p], default=p)
    b = np.select([i == 0, i == 1, i == 2, i == 3, i == 4], [p, p, t, v, v], default=q)
    return np.stack([r, g, b], axis=-1)


def apply_color_transform(
    img: Image, hue_shift_deg: float, sat_scale: float, val_scale: float
) -> Image:
    """Shift hue (degrees) and scale saturation/value; output clamped to [0, 1].

    The identity transform (0, 1, 1) returns the image unchanged rather
    than paying a conversion round trip.
    """
    if img.channels != 3:
        raise ValueError("color transforms need a 3-channel image")
    if hue_shift_deg == 0.0 and sat_scale == 1.0 and val_scale == 1.0:
        return img
    hwc = np.moveaxis(img.data, 0, 2)
    hsv = rgb_to_hsv(hwc)
    hsv[..., 0] = (hsv[..., 0] + hue_shift_deg / 360.0) % 1.0
    hsv[..., 1] = np.clip(hsv[..., 1] * sat_scale, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] * val_scale, 0.0, 1.0)
    rgb = np.clip(hsv_to_rgb(hsv), 0.0, 1.0)
    return Image(np.moveaxis(rgb, 2, 0))


def sample_transform(spec: AugmentSpec, pair_index: int, k: int) -> tuple[float, float, float]:
    """Draw the (hue shift, sat scale, val scale) for copy k of a pair.

    Keyed deterministically by (seed, pair_index, k); every key gets an
    independent stream.
    """
    rng = np.random.default_rng([spec.seed, pair_index, k])
    hue = rng.uniform(-spec.hue_shift_range, spec.hue_shift_range)
    sat = 1.0 + rng.uniform(-spec.saturation_scale_range, spec.saturation_scale_range)
    val = 1.0 + rng.uniform(-spec.value_scale_range, spec.value_scale_range)
    return float(hue), float(sat), float(val)


def augment_pair(
    input_img: Image, target_img: Image, spec: AugmentSpec, pair_index: int, k: int
) -> tuple[Image, Image]:
    """Apply one identical sampled color transform to both images of a pair."""
    if input_img.channels != 3 or target_img.channels != 3:
        raise ValueError("color augmentation needs 3-channel images")
    hue, sat, val = sample_transform(spec, pair_index, k)
    return (
        apply_color_transform(input_img, hue, sat, val),
        apply_color_transform(target_img, hue, sat, val),
    )


def augment_dataset(ds: PairedDataset, spec: AugmentSpec) -> PairedDataset:
    """Originals plus copies_per_pair transformed copies of every pair."""
    if ds.geometry[2] != 3:
        raise ValueError("color augmentation needs a 3-channel dataset")
    pairs = []
    names = []
    for idx, ((inp, tgt), name) in enumerate(zip(ds.pairs, ds.names)):
        pairs.append((inp, tgt))
        names.append(name)
        for k in range(spec.copies_per_pair):
            pairs.append(augment_pair(inp, tgt, spec, idx, k))
            names.append(f"{name}_aug{k}")
    return PairedDataset(pairs=tuple(pairs), task_name=ds.task_name, names=tuple(names))

"""Pixel-level quality metrics and evaluation reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import Image, PairedDataset
from .layer import ExpressionLayer, apply_expression_layer

__all__ = ["pixel_metrics", "EvalReport", "evaluate_layer", "evaluate_identity"]


def pixel_metrics(a: Image, b: Image) -> tuple[float, float, float]:
    """(mae, mse, psnr_db) between two images of identical geometry.

    PSNR is 10*log10(1/mse) on the [0, 1] intensity scale; identical
    images report math.inf.
    """
    if a.geometry != b.geometry:
        raise ValueError(f"geometry mismatch: {a.geometry} vs {b.geometry}")
    diff = a.data - b.data
    mae = float(np.abs(diff).mean())
    mse = float((diff * diff).mean())
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
    return mae, mse, psnr


def _finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None


@dataclass(frozen=True)
class EvalReport:
    """Per-image metrics plus their arithmetic means for one task.

    The optional external score slots (ecs/fss/rs/fid) stay None here;
    they exist so an out-of-band perceptual scorer can merge its results
    into the same document.
    """

    task: str
    per_image: tuple[dict, ...]
    aggregate: dict
    model_hash: str | None = None
    external_scores: dict = field(
        default_factory=lambda: {"ecs": None, "fss": None, "rs": None, "fid": None}
    )

    def __post_init__(self):
        for key in ("mae", "mse", "psnr_db"):
            mean = float(np.mean([rec[key] for rec in self.per_image]))
            stored = self.aggregate[key]
            if not (mean == stored or (math.isnan(mean) and math.isnan(stored))):
                raise ValueError(f"aggregate {key} {stored} is not the mean of per-image values {mean}")

    def to_json_dict(self) -> dict:
        # JSON has no Infinity; non-finite PSNR serializes as null.
        return {
            "task": self.task,
            "model_hash": self.model_hash,
            "per_image": [
                {**rec, "psnr_db": _finite_or_none(rec["psnr_db"])} for rec in self.per_image
            ],
            "aggregate": {
                "mae": self.aggregate["mae"],
                "mse": self.aggregate["mse"],
                "psnr_db": _finite_or_none(self.aggregate["psnr_db"]),
            },
            "external_scores": dict(self.external_scores),
        }

    def write_json(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")


def _build_report(task: str, names, preds, targets, model_hash: str | None) -> EvalReport:
    records = []
    for name, pred, tgt in zip(names, preds, targets):
        mae, mse, psnr = pixel_metrics(pred, tgt)
        records.append({"name": name, "mae": mae, "mse": mse, "psnr_db": psnr})
    aggregate = {
        "mae": float(np.mean([r["mae"] for r in records])),
        "mse": float(np.mean([r["mse"] for r in records])),
        "psnr_db": float(np.mean([r["psnr_db"] for r in records])),
    }
    return EvalReport(
        task=task, per_image=tuple(records), aggregate=aggregate, model_hash=model_hash
    )


def evaluate_layer(
    layer: ExpressionLayer,
    ds: PairedDataset,
    model_hash: str | None = None,
    threads: int | None = None,
) -> EvalReport:
    """Apply the layer to every input and score against the paired targets."""
    if ds.geometry != layer.geometry:
        raise ValueError(
            f"layer geometry {layer.geometry} does not match dataset geometry {ds.geometry}"
        )
    preds = [apply_expression_layer(layer, inp, threads=threads) for inp, _ in ds.pairs]
    targets = [tgt for _, tgt in ds.pairs]
    return _build_report(layer.task_name, ds.names, preds, targets, model_hash)


def evaluate_identity(ds: PairedDataset) -> EvalReport:
    """Score the copy-input baseline: how far inputs already are from targets."""
    preds = [inp for inp, _ in ds.pairs]
    targets = [tgt for _, tgt in ds.pairs]
    return _build_report(f"{ds.task_name} (identity baseline)", ds.names, preds, targets, None)

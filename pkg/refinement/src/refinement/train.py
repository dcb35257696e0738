"""Adversarial training loop for the refinement network."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch import Tensor, nn

from .config import RefinementConfig
from .data import TripletDataset
from .discriminator import MultiScaleDiscriminator
from .losses import (
    build_feature_extractor,
    discriminator_hinge_loss,
    feature_matching_loss,
    generator_adv_loss,
    perceptual_loss,
    pixel_loss,
    weighted_total,
)
from .model import RefinementNet, build_refinement_net

CSV_COLUMNS = ("iteration", "L_pix", "L_adv_G", "L_fm", "L_per", "L_total", "L_D")


@dataclass
class TrainResult:
    generator: RefinementNet
    discriminator: MultiScaleDiscriminator
    losses: list[dict]
    csv_path: Path
    checkpoint_path: Path


def save_checkpoint(
    path: Path,
    generator: nn.Module,
    discriminator: nn.Module,
    cfg: RefinementConfig,
    iteration: int,
) -> None:
    """Writes a checkpoint atomically: temp file in place, then rename."""
    payload = {
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict(),
        "config": dataclasses.asdict(cfg),
        "iteration": iteration,
    }
    tmp = path.with_name(path.name + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)


def _to_uint8(image: Tensor) -> np.ndarray:
    array = image.detach().clamp(0.0, 1.0).mul(255.0).round().to(torch.uint8)
    return array.permute(1, 2, 0).numpy()


def _write_sample_grid(path: Path, rows: list[Tensor]) -> None:
    """Stacks row tensors (each (N, 3, H, W)) into one PNG grid."""
    strips = []
    for row in rows:
        strips.append(np.concatenate([_to_uint8(img) for img in row], axis=1))
    Image.fromarray(np.concatenate(strips, axis=0)).save(path)


def train_refinement(
    manifest_path: Path | str,
    cfg: RefinementConfig,
    out_dir: Path | str,
    iterations: int,
    seed: int = 0,
    extractor: object = "auto",
    literal_fake_input: bool = False,
    sample_every: int = 0,
    checkpoint_every: int = 0,
    log=None,
) -> TrainResult:
    """Alternating discriminator/generator updates over the manifest triplets.

    Emits a per-iteration loss CSV, optional periodic sample grids and
    checkpoints, and a final checkpoint. Raises RuntimeError with the
    iteration index if any loss goes non-finite. With iterations=0 the
    final checkpoint holds the freshly initialized weights.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be non-negative, got {iterations}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ds = TripletDataset(manifest_path, image_size=cfg.image_size)

    torch.manual_seed(seed)
    generator = build_refinement_net(cfg)
    discriminator = MultiScaleDiscriminator(
        cfg.n_discriminator_scales, base_channels=cfg.base_channels * 2
    )

    if extractor == "auto":
        extractor = build_feature_extractor() if cfg.lambda_per > 0 else None
    if extractor is None and cfg.lambda_per > 0:
        warnings.warn("perceptual term disabled: forcing lambda_per to 0", stacklevel=2)
        cfg = dataclasses.replace(cfg, lambda_per=0.0)

    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.learning_rate, betas=cfg.betas)
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=cfg.learning_rate, betas=cfg.betas)

    sampler = torch.Generator().manual_seed(seed)
    preview = torch.arange(min(4, len(ds)))
    csv_path = out_dir / "losses.csv"
    checkpoint_path = out_dir / "checkpoint.pt"
    losses: list[dict] = []

    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for iteration in range(1, iterations + 1):
            indices = torch.randint(len(ds), (cfg.batch_size,), generator=sampler)
            inputs, targets = ds.batch(indices)

            # Discriminator step on detached fakes.
            if literal_fake_input:
                fakes = inputs
            else:
                with torch.no_grad():
                    fakes = generator(inputs)
            d_real, _ = discriminator(targets)
            d_fake, _ = discriminator(fakes)
            l_d = discriminator_hinge_loss(d_real, d_fake, cfg.n_discriminator_scales)
            opt_d.zero_grad()
            l_d.backward()
            opt_d.step()

            # Generator step against the updated discriminator.
            outputs = generator(inputs)
            d_out, fake_features = discriminator(outputs)
            with torch.no_grad():
                _, real_features = discriminator(targets)
            l_pix = pixel_loss(outputs, targets)
            l_adv = generator_adv_loss(d_out, cfg.n_discriminator_scales)
            l_fm = feature_matching_loss(fake_features, real_features, cfg.n_discriminator_scales)
            if extractor is not None and cfg.lambda_per > 0:
                l_per = perceptual_loss(outputs, targets, extractor)
            else:
                l_per = torch.zeros(())
            l_total = weighted_total(cfg, l_pix, l_adv, l_fm, l_per)
            opt_g.zero_grad()
            l_total.backward()
            opt_g.step()

            if not (torch.isfinite(l_total) and torch.isfinite(l_d)):
                raise RuntimeError(f"training diverged: non-finite loss at iteration {iteration}")

            row = {
                "iteration": iteration,
                "L_pix": float(l_pix.detach()),
                "L_adv_G": float(l_adv.detach()),
                "L_fm": float(l_fm.detach()),
                "L_per": float(l_per.detach()),
                "L_total": float(l_total.detach()),
                "L_D": float(l_d.detach()),
            }
            losses.append(row)
            writer.writerow([row[col] for col in CSV_COLUMNS])
            if log is not None and (iteration == 1 or iteration % 25 == 0):
                log(
                    f"iter {iteration}: total {row['L_total']:.3f} "
                    f"pix {row['L_pix']:.3f} d {row['L_D']:.3f}"
                )

            if sample_every and iteration % sample_every == 0:
                with torch.no_grad():
                    refined = generator(ds.inputs[preview])
                samples_dir = out_dir / "samples"
                samples_dir.mkdir(exist_ok=True)
                grid = [ds.inputs[preview], refined, ds.targets[preview]]
                _write_sample_grid(samples_dir / f"iter_{iteration:06d}.png", grid)
            if checkpoint_every and iteration % checkpoint_every == 0:
                save_checkpoint(checkpoint_path, generator, discriminator, cfg, iteration)

    save_checkpoint(checkpoint_path, generator, discriminator, cfg, iterations)
    return TrainResult(
        generator=generator,
        discriminator=discriminator,
        losses=losses,
        csv_path=csv_path,
        checkpoint_path=checkpoint_path,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refinement-train",
        description="Train the refinement network on exported triplets.",
    )
    parser.add_argument("--manifest", required=True, help="path to manifest.json")
    parser.add_argument("--out-dir", required=True, help="directory for outputs")
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--image-size", type=int, default=64)
    parser.add_argument("--base-channels", type=int, default=16)
    parser.add_argument("--n-lab", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sample-every", type=int, default=50)
    parser.add_argument("--checkpoint-every", type=int, default=0)
    parser.add_argument("--lr", type=float, default=2e-4)
    parser.add_argument(
        "--literal-fake-input",
        action="store_true",
        help="feed the raw intermediate to the discriminator as the fake",
    )
    parser.add_argument(
        "--no-perceptual",
        action="store_true",
        help="skip the pretrained extractor and the perceptual term",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = RefinementConfig(
            image_size=args.image_size,
            base_channels=args.base_channels,
            n_lab=args.n_lab,
            learning_rate=args.lr,
            lambda_per=0.0 if args.no_perceptual else 1.0,
        )
        start = time.perf_counter()
        result = train_refinement(
            args.manifest,
            cfg,
            args.out_dir,
            args.iterations,
            seed=args.seed,
            extractor=None if args.no_perceptual else "auto",
            literal_fake_input=args.literal_fake_input,
            sample_every=args.sample_every,
            checkpoint_every=args.checkpoint_every,
            log=print,
        )
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - start
    print(f"trained {args.iterations} iterations in {elapsed:.1f}s")
    print(f"losses: {result.csv_path}")
    print(f"checkpoint: {result.checkpoint_path}")
    return 0


def main_entry() -> None:
    sys.exit(main())

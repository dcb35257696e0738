"""Configuration for the refinement network and its training loop."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RefinementConfig:
    """Network and loss settings.

    The defaults are desk scale: 64x64 images and a thin channel budget.
    Block counts follow the reference layout (3 encoding, 10 latent,
    3 decoding attention blocks); n_lab is the knob to shrink first when
    iterating quickly.
    """

    image_size: int = 64
    base_channels: int = 16
    n_eab: int = 3
    n_lab: int = 10
    n_dab: int = 3
    lambda_pix: float = 100.0
    lambda_adv: float = 1.0
    lambda_fm: float = 10.0
    lambda_per: float = 1.0
    n_discriminator_scales: int = 3
    learning_rate: float = 2e-4
    betas: tuple[float, float] = (0.5, 0.999)
    batch_size: int = 1
    hourglass_depth: int = 2

    def __post_init__(self):
        if self.n_eab != self.n_dab:
            raise ValueError(
                f"encoder/decoder must be symmetric: n_eab={self.n_eab} vs n_dab={self.n_dab}"
            )
        for name in ("lambda_pix", "lambda_adv", "lambda_fm", "lambda_per"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.image_size % (2 ** self.n_eab) != 0:
            raise ValueError(
                f"image_size {self.image_size} is not divisible by 2^{self.n_eab}"
            )
        if self.n_eab < 1 or self.n_lab < 0:
            raise ValueError("need at least one encoding block and n_lab >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.n_discriminator_scales < 1:
            raise ValueError("need at least one discriminator scale")

    @property
    def bottleneck_size(self) -> int:
        return self.image_size // (2 ** self.n_eab)

    @property
    def bottleneck_channels(self) -> int:
        return self.base_channels * (2 ** self.n_eab)


# Full-scale settings, retained for reference but not exercised in CI.
FULL_SCALE = RefinementConfig(image_size=400, base_channels=64, n_lab=10)

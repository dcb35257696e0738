"""Per-pixel sparsified ridge mappings between paired image domains.

Train one tiny regularized affine model per output pixel from an r x r
input neighborhood, store the result as a compact binary layer, and apply
it to new images.  Hot loops run in a compiled extension when available,
with a pure-Python fallback selected at import.
"""

from .augment import (
    AugmentSpec,
    apply_color_transform,
    augment_dataset,
    augment_pair,
    hsv_to_rgb,
    rgb_to_hsv,
    sample_transform,
)
from .image import Image, PairedDataset, PatchVector, extract_receptive_field, load_paired_dataset
from .kernels import HAVE_COMPILED, default_backend_name, get_backend, resolve_threads
from .layer import (
    ExpressionLayer,
    LayerFormatError,
    apply_expression_layer,
    export_intermediates,
    load_layer,
    save_layer,
    train_expression_layer,
)
from .metrics import EvalReport, evaluate_identity, evaluate_layer, pixel_metrics
from .solver import (
    PixelSolution,
    PixelSystem,
    RidgeConfig,
    SolverError,
    build_pixel_system,
    dense_ridge_oracle,
    effective_penalty,
    gradient_descent_oracle,
    ridge_loss,
    ridge_lstsq,
    solve_pixel,
    solve_system,
)
from .verify import run_verification

__version__ = "0.1.0"

__all__ = [
    "AugmentSpec",
    "EvalReport",
    "ExpressionLayer",
    "HAVE_COMPILED",
    "Image",
    "LayerFormatError",
    "PairedDataset",
    "PatchVector",
    "PixelSolution",
    "PixelSystem",
    "RidgeConfig",
    "SolverError",
    "__version__",
    "apply_color_transform",
    "apply_expression_layer",
    "augment_dataset",
    "augment_pair",
    "build_pixel_system",
    "default_backend_name",
    "dense_ridge_oracle",
    "effective_penalty",
    "evaluate_identity",
    "evaluate_layer",
    "export_intermediates",
    "extract_receptive_field",
    "get_backend",
    "gradient_descent_oracle",
    "hsv_to_rgb",
    "load_layer",
    "load_paired_dataset",
    "pixel_metrics",
    "resolve_threads",
    "rgb_to_hsv",
    "ridge_loss",
    "ridge_lstsq",
    "sample_transform",
    "save_layer",
    "solve_pixel",
    "solve_system",
    "train_expression_layer",
    "run_verification",
]

"""Pure-NumPy fallback kernels.

Training deliberately runs the same per-pixel assembly and Cholesky solve
as :func:`mreg.solver.solve_system`, so a layer trained on this backend is
bit-identical to an explicit build-then-solve loop.  The compiled backend
trades that exactness for speed (agreement within ~1e-12).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..solver import solve_system

BACKEND = "python"


def train_row(
    inputs: np.ndarray,
    targets: np.ndarray,
    row: int,
    r: int,
    penalty: float,
    threads: int,
    w_out: np.ndarray,
    b_out: np.ndarray,
) -> int:
    """Fit every pixel of one row of one channel plane.

    ``inputs``/``targets`` are (N, H, W) float64; solutions land in
    ``w_out`` (W, r^2) and ``b_out`` (W,).  Returns the first column whose
    solve failed, or -1.  ``threads`` is ignored; this backend is serial.
    """
    n, height, width = inputs.shape
    half = r // 2
    rows = np.clip(np.arange(row - half, row + half + 1), 0, height - 1)
    for col in range(width):
        cols = np.clip(np.arange(col - half, col + half + 1), 0, width - 1)
        # ascontiguousarray keeps BLAS on the same code path as an explicit
        # build-then-solve, which is what makes this backend bit-identical.
        x = np.ascontiguousarray(inputs[:, rows[:, None], cols[None, :]].reshape(n, r * r))
        t = np.ascontiguousarray(targets[:, row, col])
        try:
            w, b = solve_system(x, t, penalty)
        except Exception:
            return col
        w_out[col] = w
        b_out[col] = b
    return -1


def apply_plane(
    plane: np.ndarray,
    weights: np.ndarray,
    biases: np.ndarray,
    r: int,
    threads: int,
    out: np.ndarray,
) -> None:
    """Affine map per pixel over one channel plane, clamped to [0, 1]."""
    height, width = plane.shape
    half = r // 2
    padded = np.pad(plane, half, mode="edge")
    windows = sliding_window_view(padded, (r, r)).reshape(height, width, r * r)
    np.einsum("hwk,hwk->hw", windows, weights, out=out)
    out += biases
    np.clip(out, 0.0, 1.0, out=out)

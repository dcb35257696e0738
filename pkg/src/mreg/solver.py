"""Per-pixel ridge systems: closed-form solves, loss, and verification oracles.

For one output pixel, the design matrix X stacks the vectorized r*r input
patches of the N training pairs and t holds the corresponding target
intensities.  The weights w and bias b minimize

    L(w, b) = ||X w + b 1 - t||^2 + (lambda/2) (||w||^2 + b^2)

whose unique stationary point solves the bordered normal equations

    [X'X + c I   X'1] [w]   [X't]
    [1'X         N+c] [b] = [1't]

with c = lambda/2.  The literature on this layer also states the system
with c = lambda directly; both penalty conventions are supported via
``variant``:

* ``"consistent"`` (default): c = lambda/2, the exact minimizer of L.
* ``"direct"``: c = lambda, i.e. lambda used unchanged as the Tikhonov
  coefficient (equivalently, the minimizer of L with lambda doubled).

Two independent oracles cross-check the closed form: plain gradient descent
on L (never forms the normal equations) and a QR-based augmented
least-squares solve (never runs a Cholesky factorization).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .image import PairedDataset, extract_receptive_field

__all__ = [
    "RIDGE_VARIANTS",
    "RidgeConfig",
    "PixelSystem",
    "PixelSolution",
    "SolverError",
    "effective_penalty",
    "build_pixel_system",
    "solve_system",
    "solve_pixel",
    "ridge_loss",
    "penalized_loss",
    "gradient_descent_oracle",
    "ridge_lstsq",
    "dense_ridge_oracle",
    "DENSE_ORACLE_MAX_PIXELS",
]

RIDGE_VARIANTS = ("consistent", "direct")

# Largest m*n the dense (global receptive field) oracle will accept.
DENSE_ORACLE_MAX_PIXELS = 4096


class SolverError(RuntimeError):
    """A per-pixel solve failed (the system was not positive definite)."""


def effective_penalty(lambda_reg: float, variant: str = "consistent") -> float:
    """Map (lambda_reg, variant) to the coefficient c added to the diagonal."""
    if lambda_reg <= 0.0 or not np.isfinite(lambda_reg):
        raise ValueError(f"lambda must be positive, got {lambda_reg}")
    if variant == "consistent":
        return 0.5 * lambda_reg
    if variant == "direct":
        return float(lambda_reg)
    raise ValueError(f"unknown ridge variant {variant!r}; expected one of {RIDGE_VARIANTS}")


@dataclass(frozen=True)
class RidgeConfig:
    """Training configuration: receptive field size and penalty."""

    r: int = 5
    lambda_reg: float = 1.0
    variant: str = "consistent"

    def __post_init__(self):
        if self.r < 1 or self.r % 2 == 0:
            raise ValueError(f"receptive field size must be odd and >= 1, got {self.r}")
        effective_penalty(self.lambda_reg, self.variant)  # validates both

    @property
    def penalty(self) -> float:
        return effective_penalty(self.lambda_reg, self.variant)


@dataclass(frozen=True)
class PixelSystem:
    """Design matrix and targets for one (pixel, channel).

    Row n of X is the vectorized receptive field of training input n at
    ``pixel``; t[n] is the matching target intensity.
    """

    X: np.ndarray
    t: np.ndarray
    pixel: tuple[int, int]
    channel: int

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.t, dtype=np.float64))
        if X.ndim != 2 or t.ndim != 1 or X.shape[0] != t.shape[0]:
            raise ValueError(f"inconsistent system shapes: X {X.shape}, t {t.shape}")
        if X.shape[0] == 0:
            raise ValueError("empty dataset: the system needs at least one row")
        if not (np.isfinite(X).all() and np.isfinite(t).all()):
            raise ValueError("system entries must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t", t)

    @property
    def n_pairs(self) -> int:
        return self.X.shape[0]

    @property
    def n_weights(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class PixelSolution:
    """Receptive-field weights and bias for one pixel."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.w, dtype=np.float64))
        b = float(self.b)
        if w.ndim != 1:
            raise ValueError("weights must be a flat vector")
        if not (np.isfinite(w).all() and np.isfinite(b)):
            raise ValueError("solution entries must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)


def build_pixel_system(
    ds: PairedDataset, channel: int, pixel: tuple[int, int], r: int
) -> PixelSystem:
    """Assemble X (N x r^2) and t (N) for one pixel, rows in dataset order."""
    rows = []
    targets = np.empty(len(ds))
    row_idx, col_idx = pixel
    for n, (inp, tgt) in enumerate(ds.pairs):
        rows.append(extract_receptive_field(inp, channel, pixel, r).values)
        targets[n] = tgt.data[channel, row_idx, col_idx]
    return PixelSystem(X=np.stack(rows), t=targets, pixel=pixel, channel=channel)


def solve_system(X: np.ndarray, t: np.ndarray, penalty: float) -> tuple[np.ndarray, float]:
    """Solve the bordered normal equations with diagonal penalty ``penalty``.

    Assembles the (k+1) x (k+1) SPD matrix and factors it with Cholesky.
    Raises SolverError on factorization failure instead of regularizing
    further.
    """
    if penalty <= 0.0:
        raise ValueError(f"penalty must be positive, got {penalty}")
    n, k = X.shape
    a = np.empty((k + 1, k + 1))
    a[:k, :k] = X.T @ X
    a[:k, :k][np.diag_indices(k)] += penalty
    col_sums = X.sum(axis=0)
    a[:k, k] = col_sums
    a[k, :k] = col_sums
    a[k, k] = n + penalty
    rhs = np.empty(k + 1)
    rhs[:k] = X.T @ t
    rhs[k] = t.sum()
    try:
        cho = scipy.linalg.cho_factor(a, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SolverError(f"SPD factorization failed: {exc}") from exc
    sol = scipy.linalg.cho_solve(cho, rhs)
    if not np.isfinite(sol).all():
        raise SolverError("solve produced non-finite values")
    return sol[:k], float(sol[k])


def solve_pixel(
    sys: PixelSystem, lambda_reg: float, variant: str = "consistent"
) -> PixelSolution:
    """Closed-form minimizer for one pixel's ridge system."""
    c = effective_penalty(lambda_reg, variant)
    w, b = solve_system(sys.X, sys.t, c)
    return PixelSolution(w=w, b=b)


def penalized_loss(
    X: np.ndarray, t: np.ndarray, w: np.ndarray, b: float, penalty: float
) -> float:
    """||X w + b 1 - t||^2 + penalty * (||w||^2 + b^2), unaveraged."""
    resid = X @ w + b - t
    return float(resid @ resid + penalty * (w @ w + b * b))


def ridge_loss(sys: PixelSystem, sol: PixelSolution, lambda_reg: float) -> float:
    """The training loss with its lambda/2 penalty factor, exactly as defined."""
    if sol.w.shape[0] != sys.n_weights:
        raise ValueError(
            f"dimension mismatch: {sol.w.shape[0]} weights vs {sys.n_weights} design columns"
        )
    return penalized_loss(sys.X, sys.t, sol.w, sol.b, 0.5 * lambda_reg)


def gradient_descent_oracle(
    sys: PixelSystem,
    lambda_reg: float,
    steps: int,
    step_size: float,
    variant: str = "consistent",
    grad_tol: float = 0.0,
) -> PixelSolution:
    """Minimize the pixel loss by plain gradient descent from zero.

    Test-only reference path: the gradient is evaluated through the
    residual (never through assembled normal equations), so agreement with
    ``solve_pixel`` checks the closed form end to end.  A sustained loss
    increase over a trailing window raises SolverError (divergence);
    ``grad_tol`` > 0 allows early exit once the gradient inf-norm falls
    below it.
    """
    c = effective_penalty(lambda_reg, variant)
    X, t = sys.X, sys.t
    w = np.zeros(sys.n_weights)
    b = 0.0
    window = 50
    recent: list[float] = []
    for step in range(steps):
        resid = X @ w + b - t
        grad_w = 2.0 * (X.T @ resid + c * w)
        grad_b = 2.0 * (resid.sum() + c * b)
        loss = float(resid @ resid + c * (w @ w + b * b))
        if not np.isfinite(loss):
            raise SolverError(f"gradient descent diverged at step {step}: loss is not finite")
        recent.append(loss)
        if len(recent) > window:
            prev = recent.pop(0)
            if loss > prev * (1.0 + 1e-12) + 1e-300:
                raise SolverError(
                    f"gradient descent diverged at step {step}: "
                    f"loss rose from {prev:.6g} to {loss:.6g}"
                )
        if grad_tol > 0.0 and max(np.abs(grad_w).max(initial=0.0), abs(grad_b)) < grad_tol:
            break
        w = w - step_size * grad_w
        b = b - step_size * grad_b
    return PixelSolution(w=w, b=b)


def ridge_lstsq(X: np.ndarray, t: np.ndarray, penalty: float) -> tuple[np.ndarray, float]:
    """Ridge solve by augmented least squares (QR/SVD route).

    Minimizes ||A theta - rhs||^2 with A = [[X, 1], [sqrt(penalty) I]] and
    rhs = [t, 0]: algebraically the same minimizer as the normal equations,
    computed without ever forming them.  Used as an independent oracle.
    """
    n, k = X.shape
    if penalty <= 0.0:
        raise ValueError(f"penalty must be positive, got {penalty}")
    aug = np.zeros((n + k + 1, k + 1))
    aug[:n, :k] = X
    aug[:n, k] = 1.0
    aug[n:, :] = np.sqrt(penalty) * np.eye(k + 1)
    rhs = np.concatenate([t, np.zeros(k + 1)])
    sol, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    return sol[:k], float(sol[k])


def dense_ridge_oracle(
    ds: PairedDataset,
    channel: int,
    pixel: tuple[int, int],
    lambda_reg: float,
    variant: str = "consistent",
) -> tuple[np.ndarray, float]:
    """Global-receptive-field ridge baseline: the pixel sees the whole image.

    Each design row is a full flattened input channel plane (m*n values),
    so the weight vector has one entry per input pixel.  Refused for
    m*n > DENSE_ORACLE_MAX_PIXELS.  Used to quantify what the r*r
    sparsification discards and to cross-check the masked solver on
    designs that coincide.
    """
    height, width, channels = ds.geometry
    if height * width > DENSE_ORACLE_MAX_PIXELS:
        raise ValueError(
            f"image too large for the dense oracle: {height}x{width} exceeds "
            f"{DENSE_ORACLE_MAX_PIXELS} pixels"
        )
    if not 0 <= channel < channels:
        raise ValueError(f"channel {channel} out of range")
    row, col = pixel
    X = np.stack([inp.data[channel].ravel() for inp, _ in ds.pairs])
    t = np.array([tgt.data[channel, row, col] for _, tgt in ds.pairs])
    c = effective_penalty(lambda_reg, variant)
    return ridge_lstsq(X, t, c)

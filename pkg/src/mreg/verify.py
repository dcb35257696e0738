"""Randomized self-verification: closed form vs gradient descent vs dense oracle.

Backs the ``verify`` CLI subcommand.  Each check draws small random
systems from one seed, so a run is reproducible, and reports pass/fail
per named property.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .image import Image, PairedDataset
from .solver import (
    PixelSolution,
    PixelSystem,
    build_pixel_system,
    effective_penalty,
    gradient_descent_oracle,
    dense_ridge_oracle,
    ridge_loss,
    ridge_lstsq,
    solve_pixel,
    solve_system,
)
from .synthetic import make_random_system

__all__ = ["CheckResult", "fd_gradient", "gd_step_size", "run_verification"]

LAMBDA_GRID = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def fd_gradient(
    sys: PixelSystem, sol: PixelSolution, lambda_reg: float, step: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of the training loss in all k+1 coordinates."""
    k = sys.n_weights
    grad = np.empty(k + 1)
    for i in range(k):
        w_plus = sol.w.copy()
        w_minus = sol.w.copy()
        w_plus[i] += step
        w_minus[i] -= step
        grad[i] = (
            ridge_loss(sys, PixelSolution(w=w_plus, b=sol.b), lambda_reg)
            - ridge_loss(sys, PixelSolution(w=w_minus, b=sol.b), lambda_reg)
        ) / (2.0 * step)
    grad[k] = (
        ridge_loss(sys, PixelSolution(w=sol.w, b=sol.b + step), lambda_reg)
        - ridge_loss(sys, PixelSolution(w=sol.w, b=sol.b - step), lambda_reg)
    ) / (2.0 * step)
    return grad


def gd_step_size(sys: PixelSystem, penalty: float) -> float:
    """Safe gradient-descent step: 1 / (2 * largest Hessian eigenvalue bound)."""
    design = np.hstack([sys.X, np.ones((sys.n_pairs, 1))])
    a = design.T @ design + penalty * np.eye(sys.n_weights + 1)
    lam_max = float(np.linalg.eigvalsh(a)[-1])
    return 0.5 / lam_max


def _random_systems(rng: np.random.Generator, count: int, r_grid: Sequence[int]):
    for _ in range(count):
        r = int(rng.choice(list(r_grid)))
        n = int(rng.integers(1, 11))
        lam = float(rng.choice(LAMBDA_GRID))
        yield make_random_system(rng, n, r), lam


def _check_optimality(rng, count, r_grid, inject_lambda_mismatch) -> CheckResult:
    worst = 0.0
    variant = "direct" if inject_lambda_mismatch else "consistent"
    for sys, lam in _random_systems(rng, count, r_grid):
        sol = solve_pixel(sys, lam, variant=variant)
        worst = max(worst, float(np.abs(fd_gradient(sys, sol, lam)).max()))
    return CheckResult(
        name="optimality",
        passed=worst <= 1e-4,
        detail=f"max |finite-difference gradient| = {worst:.3e} (tolerance 1e-4)",
    )


def _check_gd_oracle(rng, count, r_grid) -> CheckResult:
    worst = 0.0
    for sys, lam in _random_systems(rng, count, r_grid):
        closed = solve_pixel(sys, lam)
        c = effective_penalty(lam)
        iterated = gradient_descent_oracle(
            sys, lam, steps=300_000, step_size=gd_step_size(sys, c), grad_tol=4e-9 * c
        )
        worst = max(
            worst,
            float(np.abs(closed.w - iterated.w).max(initial=0.0)),
            abs(closed.b - iterated.b),
        )
    return CheckResult(
        name="gd-oracle",
        passed=worst <= 1e-6,
        detail=f"max |closed-form - gradient-descent| = {worst:.3e} (tolerance 1e-6)",
    )


def _check_dense_oracle(rng, count) -> CheckResult:
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 7))
        lam = float(rng.choice(LAMBDA_GRID))
        # 3x3 images with r=3 at the center: the un-padded window covers the
        # whole image, so masked and dense designs coincide column for column.
        pairs = tuple(
            (Image(rng.random((1, 3, 3))), Image(rng.random((1, 3, 3)))) for _ in range(n)
        )
        ds = PairedDataset(pairs=pairs, task_name="verify")
        sys = build_pixel_system(ds, channel=0, pixel=(1, 1), r=3)
        masked = solve_pixel(sys, lam)
        dense_w, dense_b = dense_ridge_oracle(ds, channel=0, pixel=(1, 1), lambda_reg=lam)
        worst = max(
            worst, float(np.abs(masked.w - dense_w).max()), abs(masked.b - dense_b)
        )
        # Independent route on the same padded design: Cholesky normal
        # equations vs QR augmented least squares.
        sys2 = build_pixel_system(ds, channel=0, pixel=(0, 0), r=3)
        c = effective_penalty(lam)
        w1, b1 = solve_system(sys2.X, sys2.t, c)
        w2, b2 = ridge_lstsq(sys2.X, sys2.t, c)
        worst = max(worst, float(np.abs(w1 - w2).max()), abs(b1 - b2))
    return CheckResult(
        name="dense-oracle",
        passed=worst <= 1e-8,
        detail=f"max |masked - dense/lstsq| = {worst:.3e} (tolerance 1e-8)",
    )


def _check_hand_cases() -> CheckResult:
    worst = 0.0
    # Single pair, single weight, lambda treated as the direct Tikhonov
    # coefficient: [[2, 1], [1, 2]] [w; b] = [1; 1] gives w = b = 1/3.
    sys = PixelSystem(X=np.array([[1.0]]), t=np.array([1.0]), pixel=(0, 0), channel=0)
    sol = solve_pixel(sys, 1.0, variant="direct")
    worst = max(worst, abs(sol.w[0] - 1.0 / 3.0), abs(sol.b - 1.0 / 3.0))
    # Same solution from the consistent variant at doubled lambda.
    sol2 = solve_pixel(sys, 2.0, variant="consistent")
    worst = max(worst, abs(sol2.w[0] - 1.0 / 3.0), abs(sol2.b - 1.0 / 3.0))
    # Zero design: the system collapses to (lambda + N) b = sum(t).
    zsys = PixelSystem(X=np.zeros((2, 1)), t=np.array([1.0, 1.0]), pixel=(0, 0), channel=0)
    zsol = solve_pixel(zsys, 1.0, variant="direct")
    worst = max(worst, abs(zsol.w[0]), abs(zsol.b - 2.0 / 3.0))
    # Zero targets force the all-zero solution.
    tsys = PixelSystem(X=np.array([[0.3, 0.7]]), t=np.array([0.0]), pixel=(0, 0), channel=0)
    tsol = solve_pixel(tsys, 1.0)
    worst = max(worst, float(np.abs(tsol.w).max()), abs(tsol.b))
    return CheckResult(
        name="hand-cases",
        passed=worst <= 1e-12,
        detail=f"max |solution - analytic value| = {worst:.3e} (tolerance 1e-12)",
    )


def run_verification(
    seed: int = 42,
    count: int = 24,
    r_grid: Sequence[int] = (1, 3, 5),
    inject_lambda_mismatch: bool = False,
    log: Callable[[str], None] | None = None,
) -> list[CheckResult]:
    """Run all oracle checks on ``count`` random systems per check."""
    results = [
        _check_optimality(np.random.default_rng([seed, 0]), count, r_grid, inject_lambda_mismatch),
        _check_gd_oracle(np.random.default_rng([seed, 1]), count, r_grid),
        _check_dense_oracle(np.random.default_rng([seed, 2]), max(4, count // 2)),
        _check_hand_cases(),
    ]
    if log is not None:
        for res in results:
            log(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
    return results

"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--quick]

Times layer training and application at a few sizes and prints the
speedup.  Results stay comparable because both backends produce the same
solutions (compiled within 1e-12 of the python path).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import mreg
from mreg import Image, PairedDataset, RidgeConfig, apply_expression_layer, train_expression_layer


def _dataset(rng: np.random.Generator, n: int, size: int) -> PairedDataset:
    pairs = tuple(
        (Image(rng.random((1, size, size))), Image(rng.random((1, size, size))))
        for _ in range(n)
    )
    return PairedDataset(pairs=pairs, task_name="bench")


def _time(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="smaller sizes, fewer repeats")
    args = parser.parse_args()

    if not mreg.HAVE_COMPILED:
        print("compiled backend is not available; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    if args.quick:
        train_cases = [(16, 20, 3), (24, 20, 5)]
        apply_size = 128
        repeats = 2
    else:
        train_cases = [(16, 40, 3), (32, 40, 5), (48, 60, 5)]
        apply_size = 512
        repeats = 3

    print(f"{'case':<28} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for size, n, r in train_cases:
        ds = _dataset(rng, n, size)
        cfg = RidgeConfig(r=r, lambda_reg=1.0)
        t_py = _time(lambda: train_expression_layer(ds, cfg, backend="python"), repeats)
        t_c = _time(lambda: train_expression_layer(ds, cfg, backend="compiled"), repeats)
        label = f"train {size}x{size} N={n} r={r}"
        print(f"{label:<28} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>7.1f}x")

    ds = _dataset(rng, 8, apply_size)
    layer = train_expression_layer(ds, RidgeConfig(r=5, lambda_reg=1.0), backend="compiled")
    img = ds.pairs[0][0]
    t_py = _time(lambda: apply_expression_layer(layer, img, backend="python"), repeats)
    t_c = _time(lambda: apply_expression_layer(layer, img, backend="compiled"), repeats)
    label = f"apply {apply_size}x{apply_size} r=5"
    print(f"{label:<28} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

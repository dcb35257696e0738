"""Acceptance suite: one test per shipping criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
print.  Every tolerance here is pinned; loosening one is a contract change,
not a test fix.
"""

import time

import numpy as np
import pytest

from mreg import (
    LayerFormatError,
    PixelSystem,
    RidgeConfig,
    apply_expression_layer,
    effective_penalty,
    gradient_descent_oracle,
    load_layer,
    ridge_lstsq,
    save_layer,
    solve_pixel,
    solve_system,
    train_expression_layer,
)
from mreg.cli import main
from mreg.synthetic import make_random_system, make_smile_task
from mreg.verify import fd_gradient, gd_step_size


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


def test_acceptance_optimality():
    # 200 random systems, N in 1..10, r in {1, 3, 5}, lambda in {0.1, 1, 10}:
    # every finite-difference loss-gradient coordinate at the returned
    # solution is at most 1e-4 in magnitude (step 1e-5), within 10 seconds.
    rng = np.random.default_rng(2026)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        sys = make_random_system(rng, int(rng.integers(1, 11)), int(rng.choice([1, 3, 5])))
        lam = float(rng.choice([0.1, 1.0, 10.0]))
        sol = solve_pixel(sys, lam)
        grad = fd_gradient(sys, sol, lam, step=1e-5)
        worst = max(worst, float(np.abs(grad).max()))
    elapsed = time.perf_counter() - start
    _report(
        "optimality",
        worst <= 1e-4 and elapsed < 10.0,
        f"max |fd gradient| = {worst:.3e} (tol 1e-4) over 200 systems in {elapsed:.2f}s (limit 10s)",
    )


def test_acceptance_oracle_equivalence():
    # Closed form vs an independent gradient-descent minimizer on 50 random
    # systems to 1e-6, plus hand-derived solutions to 1e-12.
    rng = np.random.default_rng(77)
    worst_gd = 0.0
    for _ in range(50):
        sys = make_random_system(rng, int(rng.integers(1, 11)), int(rng.choice([1, 3, 5])))
        lam = float(rng.choice([0.1, 1.0, 10.0]))
        closed = solve_pixel(sys, lam)
        c = effective_penalty(lam)
        gd = gradient_descent_oracle(
            sys, lam, steps=300_000, step_size=gd_step_size(sys, c), grad_tol=4e-9 * c
        )
        worst_gd = max(
            worst_gd,
            float(np.abs(closed.w - gd.w).max(initial=0.0)),
            abs(closed.b - gd.b),
        )

    # Hand case 1: X = [[1]], t = [1], direct coefficient 1 -> w = b = 1/3.
    sys1 = PixelSystem(X=np.array([[1.0]]), t=np.array([1.0]), pixel=(0, 0), channel=0)
    sol1 = solve_pixel(sys1, 1.0, variant="direct")
    # Hand case 2: zero design, two unit targets -> b = 2 / (1 + 2) = 2/3.
    sys2 = PixelSystem(X=np.zeros((2, 1)), t=np.ones(2), pixel=(0, 0), channel=0)
    sol2 = solve_pixel(sys2, 1.0, variant="direct")
    worst_hand = max(
        abs(sol1.w[0] - 1.0 / 3.0),
        abs(sol1.b - 1.0 / 3.0),
        abs(sol2.w[0]),
        abs(sol2.b - 2.0 / 3.0),
    )
    _report(
        "oracle-equivalence",
        worst_gd <= 1e-6 and worst_hand <= 1e-12,
        f"gd gap = {worst_gd:.3e} (tol 1e-6), hand-case gap = {worst_hand:.3e} (tol 1e-12)",
    )


def test_acceptance_algebraic_properties():
    # Linearity in targets (rel 1e-10), permutation invariance (1e-12), and
    # strict solution-norm shrinkage across lambda in {0.01, 0.1, 1, 10, 100}
    # for 100 random systems each.
    rng = np.random.default_rng(555)
    worst_lin = 0.0
    worst_perm = 0.0
    shrinkage_ok = True
    for _ in range(100):
        n, k = int(rng.integers(2, 11)), int(rng.choice([1, 9, 25]))
        X = rng.random((n, k))
        t1, t2 = rng.random(n), rng.random(n)
        a, b = float(rng.normal()), float(rng.normal())

        w1, b1 = solve_system(X, t1, 0.5)
        w2, b2 = solve_system(X, t2, 0.5)
        w3, b3 = solve_system(X, a * t1 + b * t2, 0.5)
        combined = np.concatenate([a * w1 + b * w2, [a * b1 + b * b2]])
        direct = np.concatenate([w3, [b3]])
        denom = max(1.0, float(np.abs(direct).max()))
        worst_lin = max(worst_lin, float(np.abs(combined - direct).max()) / denom)

        perm = rng.permutation(n)
        wp, bp = solve_system(X[perm], t1[perm], 0.5)
        worst_perm = max(worst_perm, float(np.abs(w1 - wp).max()), abs(b1 - bp))

        norms = []
        for lam in (0.01, 0.1, 1.0, 10.0, 100.0):
            w, bias = solve_system(X, t1 + 0.1, lam)
            norms.append(float(np.sqrt(w @ w + bias * bias)))
        if not all(hi > lo for hi, lo in zip(norms, norms[1:])):
            shrinkage_ok = False
    _report(
        "algebraic-properties",
        worst_lin <= 1e-10 and worst_perm <= 1e-12 and shrinkage_ok,
        f"linearity rel err = {worst_lin:.3e} (tol 1e-10), permutation gap = "
        f"{worst_perm:.3e} (tol 1e-12), shrinkage strict on 100 systems: {shrinkage_ok}",
    )


def test_acceptance_desk_scale_task():
    # 60 synthetic 16x16 pairs (sigma 0.02), 90/10 split: the trained layer's
    # held-out MAE beats the copy-the-input baseline by at least 5x, training
    # and evaluating single-threaded in under 30 seconds.
    start = time.perf_counter()
    ds = make_smile_task(n_pairs=60, size=16, channels=1, noise_sigma=0.02, seed=0)
    train = ds.subset(range(54))
    held_out = ds.subset(range(54, 60))
    layer = train_expression_layer(train, RidgeConfig(r=5, lambda_reg=1.0), threads=1)
    trained_mae = float(np.mean([
        np.abs(apply_expression_layer(layer, inp, threads=1).data - tgt.data).mean()
        for inp, tgt in held_out.pairs
    ]))
    identity_mae = float(np.mean([
        np.abs(inp.data - tgt.data).mean() for inp, tgt in held_out.pairs
    ]))
    elapsed = time.perf_counter() - start
    ratio = identity_mae / trained_mae
    _report(
        "desk-scale-task",
        ratio >= 5.0 and elapsed < 30.0,
        f"held-out mae {trained_mae:.5f} vs identity {identity_mae:.5f} "
        f"({ratio:.2f}x, need >= 5x) in {elapsed:.2f}s (limit 30s)",
    )


def test_acceptance_determinism_and_format(tmp_path):
    # Bit-identical retraining, bit-exact save/load, and detection of every
    # sampled single-byte corruption.
    ds = make_smile_task(n_pairs=10, size=12, channels=1, seed=9)
    cfg = RidgeConfig(r=3, lambda_reg=1.0)
    first = train_expression_layer(ds, cfg)
    second = train_expression_layer(ds, cfg)
    deterministic = np.array_equal(first.weights, second.weights) and np.array_equal(
        first.biases, second.biases
    )

    path = tmp_path / "layer.mreg"
    save_layer(first, path)
    loaded = load_layer(path)
    round_trip = (
        np.array_equal(loaded.weights, first.weights)
        and np.array_equal(loaded.biases, first.biases)
        and loaded.task_name == first.task_name
        and loaded.r == first.r
        and loaded.lambda_reg == first.lambda_reg
    )

    raw = path.read_bytes()
    offsets = sorted(set(range(0, len(raw), max(1, len(raw) // 23))) | {0, 5, 7, len(raw) - 1})
    corruptions_caught = 0
    for offset in offsets:
        corrupted = bytearray(raw)
        corrupted[offset] ^= 0x01
        path.write_bytes(corrupted)
        try:
            load_layer(path)
        except LayerFormatError:
            corruptions_caught += 1
    all_caught = corruptions_caught == len(offsets)
    _report(
        "determinism-and-format",
        deterministic and round_trip and all_caught,
        f"retrain bit-identical: {deterministic}, round trip exact: {round_trip}, "
        f"corruption detected: {corruptions_caught}/{len(offsets)} sampled bytes",
    )


def test_acceptance_verify_subcommand():
    # The self-check command exits 0 for ten consecutive seeds.
    codes = [main(["verify", "--seed", str(seed), "--count", "6"]) for seed in range(10)]
    _report(
        "verify-subcommand",
        all(code == 0 for code in codes),
        f"exit codes for seeds 0..9: {codes}",
    )


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))

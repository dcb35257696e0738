"""Command-line front end: train, apply, eval, augment, export-intermediates, verify.

Exit codes: 0 success, 1 usage or data error, 2 verification failure.
Flag values win over environment variables (MREG_THREADS, MREG_SEED),
which win over built-in defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time
from pathlib import Path

from .augment import AugmentSpec, augment_dataset
from .image import Image, load_paired_dataset
from .kernels import default_backend_name, resolve_threads
from .layer import (
    apply_expression_layer,
    export_intermediates,
    load_layer,
    save_layer,
    train_expression_layer,
)
from .metrics import evaluate_layer
from .solver import RidgeConfig, SolverError
from .verify import run_verification

__all__ = ["main", "main_entry"]

DEFAULT_R = 5
DEFAULT_LAMBDA = 1.0
DEFAULT_SEED = 42


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this tool reserves 2 for
    # verification failures, so usage errors are rerouted to exit 1.
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("MREG_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _UsageError(f"MREG_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _add_threads_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads", type=int, default=None,
        help="worker threads (default: MREG_THREADS or all cores)",
    )


def _add_backend_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend", choices=("auto", "compiled", "python"), default=None,
        help="kernel backend (default: auto)",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="mreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_train = sub.add_parser("train", help="fit a layer from paired PNG directories")
    p_train.add_argument("--input-dir", required=True)
    p_train.add_argument("--target-dir", required=True)
    p_train.add_argument("--output", required=True, help="layer file to write")
    p_train.add_argument("--r", type=int, default=DEFAULT_R, help="receptive field side (odd)")
    p_train.add_argument("--lambda", dest="lambda_reg", type=float, default=DEFAULT_LAMBDA,
                         help="ridge penalty (positive)")
    p_train.add_argument("--task", default=None, help="task name stored in the layer")
    _add_threads_flag(p_train)
    _add_backend_flag(p_train)

    p_apply = sub.add_parser("apply", help="map PNGs through a trained layer")
    p_apply.add_argument("--layer", required=True)
    p_apply.add_argument("--input", required=True, help="PNG file or directory of PNGs")
    p_apply.add_argument("--output", required=True, help="output file or directory")
    _add_threads_flag(p_apply)
    _add_backend_flag(p_apply)

    p_eval = sub.add_parser("eval", help="score a layer on paired PNG directories")
    p_eval.add_argument("--layer", required=True)
    p_eval.add_argument("--input-dir", required=True)
    p_eval.add_argument("--target-dir", required=True)
    p_eval.add_argument("--report", required=True, help="JSON report to write")
    _add_threads_flag(p_eval)

    p_aug = sub.add_parser("augment",
                           help="write color-jittered copies of a paired dataset")
    p_aug.add_argument("--input-dir", required=True)
    p_aug.add_argument("--target-dir", required=True)
    p_aug.add_argument("--output-input-dir", required=True)
    p_aug.add_argument("--output-target-dir", required=True)
    p_aug.add_argument("--copies", type=int, default=10, help="augmented copies per pair")
    p_aug.add_argument("--seed", type=int, default=None, help="default: MREG_SEED or 42")

    p_exp = sub.add_parser("export-intermediates",
                           help="write (input, intermediate, target) triplets plus manifest.json")
    p_exp.add_argument("--layer", required=True)
    p_exp.add_argument("--input-dir", required=True)
    p_exp.add_argument("--target-dir", required=True)
    p_exp.add_argument("--out-dir", required=True)
    _add_threads_flag(p_exp)

    p_ver = sub.add_parser("verify",
                           help="run randomized solver self-checks against independent oracles")
    p_ver.add_argument("--seed", type=int, default=None, help="default: MREG_SEED or 42")
    p_ver.add_argument("--count", type=int, default=24, help="random systems per check")
    p_ver.add_argument("--r-grid", default="1,3,5", help="comma-separated receptive field sides")
    p_ver.add_argument("--inject-inconsistency", action="store_true", help=argparse.SUPPRESS)
    return parser


def _load_pairs(input_dir: str, target_dir: str, task: str | None = None):
    return load_paired_dataset(Path(input_dir), Path(target_dir), task_name=task)


def _cmd_train(args) -> int:
    cfg = RidgeConfig(r=args.r, lambda_reg=args.lambda_reg)
    ds = _load_pairs(args.input_dir, args.target_dir, args.task)
    height, width, channels = ds.geometry
    print(f"pairs: {len(ds.pairs)}")
    print(f"geometry: {height}x{width}x{channels}")
    print(f"r: {cfg.r}")
    print(f"lambda: {cfg.lambda_reg}")
    print(f"backend: {args.backend or default_backend_name()}")
    print(f"threads: {resolve_threads(args.threads)}")
    start = time.perf_counter()
    layer = train_expression_layer(ds, cfg, threads=args.threads, backend=args.backend)
    elapsed = time.perf_counter() - start
    save_layer(layer, args.output)
    print(f"wall time: {elapsed:.3f} s")
    print(f"saved: {args.output}")
    return 0


def _cmd_apply(args) -> int:
    layer = load_layer(args.layer)
    src = Path(args.input)
    dst = Path(args.output)
    if src.is_dir():
        files = sorted(src.glob("*.png"))
        if not files:
            raise ValueError(f"no PNG files in {src}")
        dst.mkdir(parents=True, exist_ok=True)
        for f in files:
            out = apply_expression_layer(layer, Image.load_png(f), threads=args.threads,
                                         backend=args.backend)
            out.save_png(dst / f.name)
        print(f"applied layer to {len(files)} images -> {dst}")
    else:
        out = apply_expression_layer(layer, Image.load_png(src), threads=args.threads,
                                     backend=args.backend)
        dst.parent.mkdir(parents=True, exist_ok=True)
        out.save_png(dst)
        print(f"applied layer -> {dst}")
    return 0


def _cmd_eval(args) -> int:
    layer = load_layer(args.layer)
    ds = _load_pairs(args.input_dir, args.target_dir, layer.task_name)
    model_hash = hashlib.sha256(Path(args.layer).read_bytes()).hexdigest()
    report = evaluate_layer(layer, ds, model_hash=model_hash, threads=args.threads)
    report.write_json(args.report)
    agg = report.aggregate
    psnr = agg["psnr_db"]
    print(f"images: {len(report.per_image)}")
    print(f"mae: {agg['mae']:.6f}")
    print(f"mse: {agg['mse']:.6f}")
    print(f"psnr_db: {f'{psnr:.3f}' if math.isfinite(psnr) else 'inf'}")
    print(f"report: {args.report}")
    return 0


def _cmd_augment(args) -> int:
    ds = _load_pairs(args.input_dir, args.target_dir)
    spec = AugmentSpec(copies_per_pair=args.copies, seed=_resolve_seed(args.seed))
    out = augment_dataset(ds, spec)
    in_dir = Path(args.output_input_dir)
    tgt_dir = Path(args.output_target_dir)
    in_dir.mkdir(parents=True, exist_ok=True)
    tgt_dir.mkdir(parents=True, exist_ok=True)
    for name, (inp, tgt) in zip(out.names, out.pairs):
        inp.save_png(in_dir / f"{name}.png")
        tgt.save_png(tgt_dir / f"{name}.png")
    print(f"wrote {len(out.pairs)} pairs ({len(ds.pairs)} original, "
          f"{len(out.pairs) - len(ds.pairs)} augmented)")
    return 0


def _cmd_export(args) -> int:
    layer = load_layer(args.layer)
    ds = _load_pairs(args.input_dir, args.target_dir, layer.task_name)
    manifest = export_intermediates(layer, ds, args.out_dir, threads=args.threads)
    print(f"exported {len(manifest['triplets'])} triplets -> {args.out_dir}/manifest.json")
    return 0


def _cmd_verify(args) -> int:
    try:
        r_grid = tuple(int(tok) for tok in str(args.r_grid).split(",") if tok.strip())
    except ValueError:
        raise _UsageError(f"--r-grid must be comma-separated integers, got {args.r_grid!r}") from None
    if not r_grid or any(r < 1 or r % 2 == 0 for r in r_grid):
        raise _UsageError(f"--r-grid entries must be odd positive integers, got {args.r_grid!r}")
    results = run_verification(
        seed=_resolve_seed(args.seed),
        count=args.count,
        r_grid=r_grid,
        inject_lambda_mismatch=args.inject_inconsistency,
        log=print,
    )
    failed = [res.name for res in results if not res.passed]
    if failed:
        print(f"verification failed: {', '.join(failed)}")
        return 2
    print("verification passed")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "apply": _cmd_apply,
    "eval": _cmd_eval,
    "augment": _cmd_augment,
    "export-intermediates": _cmd_export,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError, SolverError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


def main_entry() -> None:
    sys.exit(main(argv=None))

"""Command-line front end.

Exit codes: 0 success, 1 error (bad flags, unreadable or corrupt files),
2 the run finished but did not meet its goal (``decompose`` hit
``--max-iter`` without converging, ``bound`` found a violated row).

Mode indices on the command line are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import io
from .compress import CompressConfig
from .diagnostics import (
    BenchSpec,
    bench_sweep,
    validate_bound_sweep,
    write_bench_csv,
    write_bound_csv,
)
from .kruskal import reconstruct
from .solvers import DecomposeConfig, decompose
from .synthetic import (
    NOISE_STREAM,
    NoiseSpec,
    add_noise,
    derive_seed,
    random_lowrank,
    toy_video,
)


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace("x", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _export_csv(path, tensor: np.ndarray) -> None:
    """Flattened values, one row per entry, for external plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"i{n}" for n in range(tensor.ndim)] + ["value"])
        for idx, v in np.ndenumerate(tensor):
            writer.writerow([*idx, repr(float(v))])


def cmd_synth(args) -> int:
    if args.toy_video:
        if args.rank is not None:
            raise UsageError("--toy-video fixes the rank at 4; drop --rank")
        shape = args.shape or [200, 200, 215]
        if len(shape) != 3 or shape[0] != shape[1]:
            raise UsageError("--toy-video needs --shape G,G,F")
        clean, truth = toy_video(shape[0], shape[2], args.seed)
    else:
        if args.shape is None or args.rank is None:
            raise UsageError("--shape and --rank are required")
        clean, truth = random_lowrank(args.shape, args.rank, args.seed)
    out = clean
    if args.snr is not None:
        out = add_noise(clean, NoiseSpec(args.snr, derive_seed(args.seed, NOISE_STREAM)))
    io.write_tensor(args.out, out)
    if args.truth:
        io.write_kruskal(args.truth, truth)
    if args.csv_export:
        _export_csv(args.csv_export, out)
    return 0


def _decompose_config(args) -> DecomposeConfig:
    if args.rank < 1:
        raise UsageError(f"--rank must be >= 1, got {args.rank}")
    sketch_flags = [
        f for f, v in (("--oversample", args.oversample), ("--power-iters", args.power_iters),
                       ("--modes", args.modes)) if v is not None
    ]
    if args.deterministic:
        if sketch_flags:
            raise UsageError(f"--deterministic conflicts with {', '.join(sketch_flags)}")
        return DecomposeConfig(
            args.rank, args.method, False, tol=args.tol, max_iter=args.max_iter,
            seed=args.seed, init=args.init,
        )
    modes = None if args.modes is None else [m - 1 for m in args.modes]
    comp = CompressConfig(
        args.rank,
        10 if args.oversample is None else args.oversample,
        2 if args.power_iters is None else args.power_iters,
        modes=modes,
        seed=args.seed,
    )
    return DecomposeConfig(
        args.rank, args.method, True, compress=comp, tol=args.tol,
        max_iter=args.max_iter, seed=args.seed, init=args.init,
    )


def cmd_decompose(args) -> int:
    cfg = _decompose_config(args)
    x = io.read_tensor(args.input)
    if args.modes is not None and any(not 1 <= m <= x.ndim for m in args.modes):
        raise UsageError(f"--modes must lie in 1..{x.ndim}")
    t0 = time.perf_counter()
    model, trace = decompose(x, cfg)
    seconds = time.perf_counter() - t0
    io.write_kruskal(args.out, model)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "fit", "seconds"])
            for it, fit, sec in trace.records():
                writer.writerow([it, repr(fit), f"{sec:.6g}"])
    print(
        f"method={cfg.method} randomized={int(cfg.randomized)} rank={cfg.rank} "
        f"iters={trace.iterations} seconds={seconds:.6g} error={trace.relative_error:.10g}"
    )
    return 0 if trace.converged else 2


def cmd_reconstruct(args) -> int:
    model = io.read_kruskal(args.input)
    x = reconstruct(model)
    io.write_tensor(args.out, x)
    if args.csv_export:
        _export_csv(args.csv_export, x)
    return 0


def cmd_bound(args) -> int:
    ks = args.ks or list(range(5, 50, 5))
    reports = validate_bound_sweep(
        args.shape, args.rank, ks, args.oversample, args.trials, args.seed, args.power_iters
    )
    with _output(args.out) as fh:
        write_bound_csv(args.shape, args.rank, reports, fh)
    if args.power_iters == 0 and not all(r.holds for r in reports):
        return 2
    return 0


def cmd_bench(args) -> int:
    specs = [
        BenchSpec(
            tuple(shape), rank, method, args.oversample, args.power_iters, seed,
            args.snr, args.tol, args.max_iter, 3 if args.repeat else 1,
        )
        for shape in args.shapes
        for rank in args.ranks
        for method in args.methods
        for seed in args.seeds
    ]
    records = bench_sweep(specs, parallel=args.parallel)
    with _output(args.out) as fh:
        write_bench_csv(records, fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randcp", description="Randomized CP tensor decomposition."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic tensor file")
    p.add_argument("--shape", type=_int_list)
    p.add_argument("--rank", type=int)
    p.add_argument("--snr", type=float)
    p.add_argument("--toy-video", action="store_true")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="also write the ground-truth model here")
    p.add_argument("--csv-export")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decompose", help="CP-decompose a tensor file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--method", choices=["als", "bcd"], default="als")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--oversample", type=int, help="default 10")
    p.add_argument("--power-iters", type=int, help="default 2")
    p.add_argument("--modes", type=_int_list, help="1-based modes to compress (default all)")
    p.add_argument("--init", choices=["eig", "random"], default="eig")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="per-iteration fit CSV")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="dense tensor from a model file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-export")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("bound", help="empirical check of the expected-error bound")
    p.add_argument("--shape", type=_int_list, default=[50, 50, 50])
    p.add_argument("--rank", type=int, default=25)
    p.add_argument("--ks", type=_int_list, help="target ranks (default 5,10,...,45)")
    p.add_argument("--oversample", type=int, default=2)
    p.add_argument("--power-iters", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("bench", help="randomized vs deterministic timing sweep")
    p.add_argument("--shapes", type=lambda s: [_int_list(v) for v in s.split(";")],
                   required=True, help="e.g. '100x100x100;200x200x200'")
    p.add_argument("--ranks", type=_int_list, required=True)
    p.add_argument("--methods", type=lambda s: s.split(","), default=["als"])
    p.add_argument("--oversample", type=int, default=10)
    p.add_argument("--power-iters", type=int, default=2)
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--snr", type=float)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--repeat", action="store_true", help="median of 3 timings")
    p.add_argument("--parallel", action="store_true", help="concurrent runs (timings skewed)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags; the contract reserves 2.
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (UsageError, io.FormatError, ValueError, OSError, ArithmeticError) as exc:
        print(f"randcp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

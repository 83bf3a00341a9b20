"""Error bound for randomized compression, compression ratios, benchmarks."""

from __future__ import annotations

import csv
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.linalg as la

from .compress import CompressConfig, compress, projection_residual
from .solvers import DecomposeConfig, decompose
from .synthetic import NOISE_STREAM, NoiseSpec, add_noise, derive_seed, random_lowrank
from .tensor import as_tensor

__all__ = [
    "BoundReport",
    "BenchSpec",
    "BenchRecord",
    "tail_energies",
    "expected_error_bound",
    "validate_bound",
    "validate_bound_sweep",
    "compression_ratio_cp",
    "compression_ratio_svd",
    "bench_sweep",
    "BENCH_HEADER",
    "BOUND_HEADER",
    "write_bench_csv",
    "write_bound_csv",
]

BENCH_HEADER = (
    "shape,rank,method,randomized,p,q,seed,seconds,iterations,error,speedup,converged"
)
BOUND_HEADER = "shape,rank,k,p,trials,mean_residual,bound,holds"
ROUNDOFF_RTOL = 1e-12


@dataclass
class BoundReport:
    """Expected-error bound of randomized compression and, optionally, the
    empirical mean residual it should dominate."""

    k: int
    p: int
    tail_energies: np.ndarray
    bound: float
    mean_residual: float = float("nan")
    trials: int = 0
    norm: float = float("nan")

    @property
    def roundoff(self) -> float:
        """Absolute slack for comparing two quantities that are both zero in
        exact arithmetic (``k`` at or above the exact multilinear rank)."""
        return ROUNDOFF_RTOL * self.norm

    @property
    def holds(self) -> bool:
        return self.trials > 0 and self.mean_residual <= self.bound + self.roundoff


def _bound_prefactor(k: int, p: int) -> float:
    return math.sqrt(1.0 + k / (p - 1.0))


def tail_energies(tensor: np.ndarray, k: int) -> np.ndarray:
    """``sum_{j > k} sigma_{nj}^2`` for every mode ``n``."""
    x = np.asarray(tensor, dtype=np.float64)
    out = np.empty(x.ndim)
    for n in range(x.ndim):
        sv = la.svdvals(np.moveaxis(x, n, 0).reshape(x.shape[n], -1), check_finite=False)
        out[n] = float(np.sum(sv[k:] ** 2))
    return out


def expected_error_bound(tensor: np.ndarray, k: int, p: int) -> BoundReport:
    """``sqrt(1 + k/(p-1)) * sqrt(sum_n sum_{j>k} sigma_{nj}^2)``.

    Upper bound on the expected projection residual of Gaussian compression
    without power iterations. Needs ``k >= 2``, ``p >= 2`` and ``k`` below
    every extent.
    """
    x = as_tensor(tensor)
    if k < 2 or p < 2:
        raise ValueError(f"the bound needs k >= 2 and p >= 2, got k={k}, p={p}")
    if k >= min(x.shape):
        raise ValueError(f"k={k} must be below every extent of shape {x.shape}")
    tails = tail_energies(x, k)
    bound = _bound_prefactor(k, p) * math.sqrt(float(tails.sum()))
    return BoundReport(k, p, tails, bound, norm=float(np.linalg.norm(x.ravel())))


def _empirical(x: np.ndarray, report: BoundReport, trials: int, seed: int, q: int) -> BoundReport:
    residuals = []
    for t in range(trials):
        cfg = CompressConfig(
            report.k, report.p, q, seed=derive_seed(seed, report.k, t)
        )
        residuals.append(projection_residual(x, compress(x, cfg)))
    report.mean_residual = float(np.mean(residuals))
    report.trials = trials
    return report


def validate_bound(
    shape: Sequence[int],
    rank: int,
    k: int,
    p: int,
    trials: int = 100,
    seed: int = 0,
    q: int = 0,
) -> BoundReport:
    """Mean projection residual of ``trials`` Gaussian compressions of one
    random rank-``rank`` tensor, next to the closed-form bound.

    The bound assumes ``q = 0``; other values are reported but the bound
    does not apply to them.
    """
    return validate_bound_sweep(shape, rank, [k], p, trials, seed, q)[0]


def validate_bound_sweep(
    shape: Sequence[int],
    rank: int,
    ks: Iterable[int],
    p: int,
    trials: int = 100,
    seed: int = 0,
    q: int = 0,
) -> list[BoundReport]:
    """:func:`validate_bound` over several target ranks on the same tensor."""
    x, _ = random_lowrank(shape, rank, seed)
    return [_empirical(x, expected_error_bound(x, k, p), trials, seed, q) for k in ks]


def compression_ratio_cp(shape: Sequence[int], rank: int) -> float:
    """``IJK / (R (I + J + K + 1))`` for a third-order tensor."""
    i, j, k = _three_way(shape, rank)
    return i * j * k / (rank * (i + j + k + 1))


def compression_ratio_svd(shape: Sequence[int], rank: int) -> float:
    """``IJK / (R (IJ + K + 1))``: a rank-R SVD of the ``IJ x K`` reshaping."""
    i, j, k = _three_way(shape, rank)
    return i * j * k / (rank * (i * j + k + 1))


def _three_way(shape, rank):
    if len(shape) != 3:
        raise ValueError(f"compression ratios are defined for 3-way shapes, got {tuple(shape)}")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    return (int(s) for s in shape)


@dataclass(frozen=True)
class BenchSpec:
    """One benchmark configuration; run as a randomized/deterministic pair."""

    shape: tuple
    rank: int
    method: str = "als"
    p: int = 10
    q: int = 2
    seed: int = 0
    snr: float | None = None
    tol: float = 1e-5
    max_iter: int = 500
    repeat: int = 1


@dataclass
class BenchRecord:
    shape: tuple
    rank: int
    method: str
    randomized: bool
    p: int
    q: int
    seed: int
    seconds: float
    iterations: int
    error: float
    speedup: float
    converged: bool
    failed: bool = field(default=False, compare=False)

    def as_row(self) -> list:
        return [
            "x".join(str(s) for s in self.shape),
            self.rank,
            self.method,
            int(self.randomized),
            self.p,
            self.q,
            self.seed,
            f"{self.seconds:.6g}",
            self.iterations,
            f"{self.error:.10g}",
            f"{self.speedup:.6g}",
            int(self.converged),
        ]


def _timed_run(x, cfg: DecomposeConfig, repeat: int):
    """Run ``decompose`` ``repeat`` times; median wall-clock, last result."""
    times = []
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        _, trace = decompose(x, cfg)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), trace


def _run_pair(spec: BenchSpec) -> list[BenchRecord]:
    x, _ = random_lowrank(spec.shape, spec.rank, spec.seed)
    if spec.snr is not None:
        x = add_noise(x, NoiseSpec(spec.snr, derive_seed(spec.seed, NOISE_STREAM)))
    base = dict(
        shape=tuple(spec.shape), rank=spec.rank, method=spec.method,
        p=spec.p, q=spec.q, seed=spec.seed,
    )
    results = {}
    for randomized in (False, True):
        cfg = DecomposeConfig(
            spec.rank, spec.method, randomized, tol=spec.tol, max_iter=spec.max_iter,
            seed=spec.seed, p=spec.p, q=spec.q,
        )
        try:
            results[randomized] = _timed_run(x, cfg, spec.repeat)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError):
            results[randomized] = None

    det_seconds = results[False][0] if results[False] else float("nan")
    records = []
    for randomized in (False, True):
        res = results[randomized]
        if res is None:
            records.append(BenchRecord(
                **base, randomized=randomized, seconds=float("nan"), iterations=0,
                error=float("nan"), speedup=float("nan"), converged=False, failed=True,
            ))
            continue
        seconds, trace = res
        records.append(BenchRecord(
            **base, randomized=randomized, seconds=seconds, iterations=trace.iterations,
            error=trace.relative_error, speedup=det_seconds / seconds,
            converged=trace.converged,
        ))
    return records


def bench_sweep(specs: Iterable[BenchSpec], parallel: bool = False, workers: int = 4) -> list[BenchRecord]:
    """Run matched deterministic/randomized pairs for every spec.

    Both runs of a pair share the data seed. ``speedup`` is deterministic
    seconds over this run's seconds (so 1 on the deterministic record). A
    failing run yields a record with ``failed=True`` and NaN timings; the
    sweep carries on. ``parallel`` runs specs concurrently, which skews
    timings and is meant for error-only sweeps.
    """
    specs = list(specs)
    if parallel:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(_run_pair, specs))
    else:
        chunks = [_run_pair(s) for s in specs]
    return [r for chunk in chunks for r in chunk]


def write_bench_csv(records: Iterable[BenchRecord], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BENCH_HEADER.split(","))
    for rec in records:
        writer.writerow(rec.as_row())


def write_bound_csv(shape: Sequence[int], rank: int, reports: Iterable[BoundReport], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BOUND_HEADER.split(","))
    shape_s = "x".join(str(s) for s in shape)
    for rep in reports:
        writer.writerow([
            shape_s, rank, rep.k, rep.p, rep.trials,
            f"{rep.mean_residual:.10g}", f"{rep.bound:.10g}", int(rep.holds),
        ])

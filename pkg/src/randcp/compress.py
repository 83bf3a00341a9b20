"""Randomized tensor compression.

Each mode gets an orthonormal basis ``Q_n`` from a randomized range finder
(Gaussian or uniform sketch with oversampling, optionally sharpened by
normalized power iterations), and the working tensor is projected onto it
before the next mode is processed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as la

from .tensor import as_tensor, frobenius_norm, mode_n_product

__all__ = [
    "CompressConfig",
    "CompressionResult",
    "compress",
    "projection_residual",
    "mode_rng",
    "range_basis",
]


@dataclass(frozen=True)
class CompressConfig:
    """Parameters of :func:`compress`.

    ``modes=None`` compresses every mode. ``stabilizer`` picks the
    orthonormalization used between power iterations: ``"lu"`` (permuted
    unit-lower-triangular LU factor) or ``"qr"``.
    """

    target_rank: int
    oversampling: int = 10
    power_iterations: int = 2
    modes: Sequence[int] | None = None
    distribution: Literal["gaussian", "uniform"] = "gaussian"
    seed: int = 0
    stabilizer: Literal["lu", "qr"] = "lu"

    def __post_init__(self):
        if self.target_rank < 1:
            raise ValueError(f"target_rank must be >= 1, got {self.target_rank}")
        if self.oversampling < 0:
            raise ValueError(f"oversampling must be >= 0, got {self.oversampling}")
        if self.power_iterations < 0:
            raise ValueError(f"power_iterations must be >= 0, got {self.power_iterations}")
        if self.distribution not in ("gaussian", "uniform"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.stabilizer not in ("lu", "qr"):
            raise ValueError(f"unknown stabilizer {self.stabilizer!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass
class CompressionResult:
    """Compressed tensor and per-mode bases.

    ``bases[n]`` is ``I_n x l_n`` with orthonormal columns. Modes that were
    not compressed carry the identity and ``compressed_modes[n] is False``.
    ``sketch_ranks[n]`` is the numerical rank of the final sample matrix,
    a diagnostic for rank collapse (it is below ``l_n`` when the mode has
    lower rank than the sketch width).
    """

    compressed: np.ndarray
    bases: list
    compressed_modes: tuple
    sketch_ranks: tuple = field(default=())

    def project_back(self) -> np.ndarray:
        """``compressed x_0 Q_0 x_1 Q_1 ...`` in the original space."""
        out = self.compressed
        for n, (q, flag) in enumerate(zip(self.bases, self.compressed_modes)):
            if flag:
                out = mode_n_product(out, q, n)
        return out


def mode_rng(seed: int, mode: int) -> np.random.Generator:
    """Independent PCG64 stream for ``mode``, keyed by ``(seed, mode)``.

    Streams do not depend on which other modes are compressed or in which
    order they are visited.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(mode,)))


def _test_matrix(rng: np.random.Generator, rows: int, cols: int, distribution: str) -> np.ndarray:
    if distribution == "gaussian":
        return rng.standard_normal((rows, cols))
    return rng.uniform(-1.0, 1.0, (rows, cols))


def _orthonormalize(y: np.ndarray, stabilizer: str) -> np.ndarray:
    if stabilizer == "lu":
        pl, _ = la.lu(y, permute_l=True, check_finite=False)
        return pl
    return la.qr(y, mode="economic", check_finite=False)[0]


def _numerical_rank(r: np.ndarray) -> int:
    d = np.abs(np.diag(r))
    if d.size == 0 or d.max() == 0:
        return 0
    return int(np.sum(d > d.max() * max(r.shape) * np.finfo(float).eps))


def range_basis(
    mat: np.ndarray,
    width: int,
    power_iterations: int,
    rng: np.random.Generator,
    distribution: str = "gaussian",
    stabilizer: str = "lu",
) -> tuple[np.ndarray, int]:
    """Orthonormal basis (``rows x width``) approximating the range of ``mat``.

    Returns the basis and the numerical rank of the final sample matrix.
    """
    omega = _test_matrix(rng, mat.shape[1], width, distribution)
    y = mat @ omega
    for _ in range(power_iterations):
        q = _orthonormalize(y, stabilizer)
        z = _orthonormalize(mat.T @ q, stabilizer)
        y = mat @ z
    q, r = la.qr(y, mode="economic", check_finite=False)
    return q, _numerical_rank(r)


def compress(tensor: np.ndarray, cfg: CompressConfig) -> CompressionResult:
    """Compress ``tensor`` mode by mode in ascending order.

    The sketch width of mode ``n`` is ``min(k + p, I_n)``; when it reaches
    ``I_n`` the mode is left uncompressed with an identity basis. The test
    matrix of mode ``n`` is drawn from :func:`mode_rng` ``(cfg.seed, n)``.
    """
    x = as_tensor(tensor)
    order = x.ndim
    if cfg.modes is None:
        modes = set(range(order))
    else:
        modes = set(int(m) for m in cfg.modes)
        bad = [m for m in modes if not 0 <= m < order]
        if bad:
            raise ValueError(f"modes {sorted(bad)} out of range for an order-{order} tensor")

    b = x
    bases = []
    flags = []
    ranks = []
    width = cfg.target_rank + cfg.oversampling
    for n in range(order):
        extent = x.shape[n]
        if n not in modes or width >= extent:
            bases.append(np.eye(extent))
            flags.append(False)
            ranks.append(extent)
            continue
        # Row-major matricization; the column order only permutes the rows of
        # the i.i.d. test matrix.
        mat = np.moveaxis(b, n, 0).reshape(extent, -1)
        q, rank = range_basis(
            mat,
            width,
            cfg.power_iterations,
            mode_rng(cfg.seed, n),
            cfg.distribution,
            cfg.stabilizer,
        )
        b = mode_n_product(b, q.T, n)
        bases.append(q)
        flags.append(True)
        ranks.append(rank)
    return CompressionResult(np.ascontiguousarray(b), bases, tuple(flags), tuple(ranks))


def projection_residual(tensor: np.ndarray, result: CompressionResult) -> float:
    """``||X - X x_0 Q_0 Q_0^T x_1 ... x_{N-1} Q_{N-1} Q_{N-1}^T||_F``.

    The projection is applied to ``tensor`` directly rather than derived from
    ``result.compressed``.
    """
    x = np.asarray(tensor, dtype=np.float64)
    if len(result.bases) != x.ndim:
        raise ValueError(f"need {x.ndim} bases, got {len(result.bases)}")
    proj = x
    for n, q in enumerate(result.bases):
        if q.shape[0] != x.shape[n]:
            raise ValueError(f"basis {n} has {q.shape[0]} rows, tensor extent is {x.shape[n]}")
        proj = mode_n_product(mode_n_product(proj, q.T, n), q, n)
    return frobenius_norm(x - proj)

"""Reproducible test inputs: random low-rank tensors, white noise, toy video."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kruskal import KruskalTensor, normalize, reconstruct
from .tensor import as_tensor

__all__ = ["NoiseSpec", "random_lowrank", "add_noise", "toy_video", "derive_seed", "NOISE_STREAM"]

# derive_seed key for noise fields drawn alongside a generator seed
NOISE_STREAM = 1


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit seed for a sub-task of ``seed``.

    Keeps, e.g., the noise field of a run statistically independent of the
    factors drawn from the same user seed.
    """
    return int(np.random.SeedSequence((seed, *keys)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise with ``std(signal) / std(noise) == snr``."""

    snr: float
    seed: int = 0

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr}")


def random_lowrank(
    shape: Sequence[int], rank: int, seed: int = 0
) -> tuple[np.ndarray, KruskalTensor]:
    """Dense tensor of a random rank-``rank`` model with N(0, 1) factors.

    Returns the tensor and the normalized ground-truth model.
    """
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    rng = np.random.default_rng(seed)
    factors = tuple(rng.standard_normal((int(s), rank)) for s in shape)
    model = normalize(KruskalTensor(np.ones(rank), factors))
    return reconstruct(model), model


def add_noise(tensor: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """``tensor + E`` with ``E ~ N(0, (std(tensor) / snr)^2)`` i.i.d."""
    x = as_tensor(tensor)
    if not np.any(x):
        raise ValueError("cannot set an SNR relative to a zero tensor")
    sigma = float(np.std(x)) / spec.snr
    rng = np.random.default_rng(spec.seed)
    return x + sigma * rng.standard_normal(x.shape)


def _gaussian_bump(grid: int, center: float, width: float) -> np.ndarray:
    t = np.arange(grid, dtype=np.float64)
    return np.exp(-0.5 * ((t - center) / width) ** 2)


def toy_video(
    grid: int = 200, frames: int = 215, seed: int = 0
) -> tuple[np.ndarray, KruskalTensor]:
    """Four separable Gaussian blobs flickering in disjoint time windows.

    Blob ``r`` sits at the midpoint of quadrant ``r`` of a ``grid x grid``
    image with width ``grid / 10``. Its time course is a sinusoid with 2, 5,
    9 or 14 cycles confined to the ``r``-th quarter of the frames. The phase
    of each sinusoid is drawn from ``seed``. Returns the ``(grid, grid,
    frames)`` tensor and its rank-4 ground truth.
    """
    if grid < 16 or frames < 16:
        raise ValueError("grid and frames must both be >= 16")
    rng = np.random.default_rng(seed)
    width = grid / 10.0
    lo, hi = grid / 4.0, 3.0 * grid / 4.0
    centers = [(lo, lo), (lo, hi), (hi, lo), (hi, hi)]
    cycles = [2, 5, 9, 14]
    edges = np.linspace(0, frames, 5).round().astype(int)
    phases = rng.uniform(0.0, 2.0 * np.pi, 4)

    rows, cols, times = [], [], []
    for r, ((cy, cx), k) in enumerate(zip(centers, cycles)):
        rows.append(_gaussian_bump(grid, cy, width))
        cols.append(_gaussian_bump(grid, cx, width))
        a, b = edges[r], edges[r + 1]
        t = np.zeros(frames)
        s = np.arange(b - a) / (b - a)
        t[a:b] = np.sin(2.0 * np.pi * k * s + phases[r])
        times.append(t)
    factors = tuple(np.column_stack(v) for v in (rows, cols, times))
    model = normalize(KruskalTensor(np.ones(4), factors))
    return reconstruct(model), model

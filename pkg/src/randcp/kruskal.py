"""Kruskal (CP) model: weights plus factor matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import frobenius_norm, khatri_rao, mttkrp

__all__ = [
    "KruskalTensor",
    "reconstruct",
    "normalize",
    "fit",
    "relative_error",
    "recover",
]


@dataclass(frozen=True)
class KruskalTensor:
    """CP model ``sum_r weights[r] * f_0[:, r] o f_1[:, r] o ...``.

    Attributes
    ----------
    weights : ndarray, shape (R,)
    factors : tuple of ndarray
        Factor ``n`` has shape ``(I_n, R)``.
    """

    weights: np.ndarray
    factors: tuple

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        factors = tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        if not factors:
            raise ValueError("a Kruskal tensor needs at least one factor")
        for n, f in enumerate(factors):
            if f.ndim != 2:
                raise ValueError(f"factor {n} is not a matrix")
            if f.shape[1] != weights.size:
                raise ValueError(
                    f"factor {n} has {f.shape[1]} columns, expected rank {weights.size}"
                )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "factors", factors)

    @property
    def rank(self) -> int:
        return self.weights.size

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def ndim(self) -> int:
        return len(self.factors)

    def full(self) -> np.ndarray:
        return reconstruct(self)

    def norm(self) -> float:
        """Frobenius norm of the dense tensor, from factor Gram matrices."""
        gram = np.ones((self.rank, self.rank))
        for f in self.factors:
            gram *= f.T @ f
        return float(np.sqrt(max(self.weights @ gram @ self.weights, 0.0)))


def reconstruct(k: KruskalTensor) -> np.ndarray:
    """Dense tensor of a Kruskal model."""
    first, *rest = k.factors
    if not rest:
        return first @ k.weights
    # Row-major unfolding along mode 0: the last mode varies fastest.
    flat = (first * k.weights) @ khatri_rao(*rest).T
    return flat.reshape(k.shape)


def normalize(k: KruskalTensor) -> KruskalTensor:
    """Canonical form of a Kruskal model.

    Every factor column gets unit 2-norm with the scale absorbed into the
    weights. Weights are non-negative and sorted in non-increasing order, ties
    broken by the lexicographic order of the first factor's columns. Each
    column of every factor but the last has a non-negative largest-magnitude
    entry; the compensating sign flips go into the last factor. A component with a zero
    column gets weight 0 and ``e_1`` for its zero columns.

    For first-order models the sign cannot be moved elsewhere, so the weight
    stays non-negative and the sign convention on the single factor is
    dropped.
    """
    weights = k.weights.copy()
    factors = [f.copy() for f in k.factors]
    for f in factors:
        norms = np.linalg.norm(f, axis=0)
        zero = norms == 0
        norms[zero] = 1.0
        f /= norms
        f[:, zero] = 0.0
        f[0, zero] = 1.0
        weights *= norms
        weights[zero] = 0.0

    last = factors[-1]
    for f in factors[:-1]:
        peak = f[np.argmax(np.abs(f), axis=0), np.arange(k.rank)]
        flip = peak < 0
        f[:, flip] *= -1
        last[:, flip] *= -1
    neg = weights < 0
    weights[neg] *= -1
    last[:, neg] *= -1
    # A zero weight carries no sign information.
    weights[weights == 0] = 0.0

    order = sorted(range(k.rank), key=lambda r: (-weights[r], tuple(factors[0][:, r])))
    return KruskalTensor(weights[order], tuple(f[:, order] for f in factors))


def _check_pair(x: np.ndarray, k: KruskalTensor) -> float:
    if x.shape != k.shape:
        raise ValueError(f"tensor shape {x.shape} does not match model shape {k.shape}")
    norm_x = frobenius_norm(x)
    if norm_x == 0:
        raise ValueError("input tensor has zero norm")
    return norm_x


def fit(x: np.ndarray, k: KruskalTensor) -> float:
    """Fit ``1 - ||X - Xhat||^2 / ||X||^2`` without forming ``Xhat``.

    ``||Xhat||^2`` comes from the factor Gram matrices and ``<X, Xhat>`` from
    one MTTKRP with the last factor.
    """
    x = np.asarray(x, dtype=np.float64)
    norm_x = _check_pair(x, k)
    last = k.ndim - 1
    inner = float(np.sum(mttkrp(x, k.factors, last) * k.factors[last], axis=0) @ k.weights)
    norm_hat = k.norm()
    return 1.0 - (norm_x**2 + norm_hat**2 - 2.0 * inner) / norm_x**2


def relative_error(x: np.ndarray, k: KruskalTensor) -> float:
    """``||X - Xhat||_F / ||X||_F`` with ``Xhat`` materialized."""
    x = np.asarray(x, dtype=np.float64)
    norm_x = _check_pair(x, k)
    return frobenius_norm(x - reconstruct(k)) / norm_x


def recover(compressed: KruskalTensor, bases: Sequence[np.ndarray]) -> KruskalTensor:
    """Map compressed-space factors back to full size, then normalize.

    Factor ``n`` becomes ``bases[n] @ compressed.factors[n]``.
    """
    if len(bases) != compressed.ndim:
        raise ValueError(f"need {compressed.ndim} bases, got {len(bases)}")
    factors = []
    for n, (q, f) in enumerate(zip(bases, compressed.factors)):
        q = np.asarray(q, dtype=np.float64)
        if q.ndim != 2 or q.shape[1] != f.shape[0]:
            raise ValueError(
                f"basis {n} of shape {q.shape} does not match factor rows {f.shape[0]}"
            )
        factors.append(q @ f)
    return normalize(KruskalTensor(compressed.weights.copy(), tuple(factors)))


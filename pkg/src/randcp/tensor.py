"""Dense tensor primitives: unfolding, folding, mode products and friends.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 stored in
row-major (C) order. Modes are zero-based, like numpy axes.

The mode-n unfolding uses the Kolda-Bader column ordering: for the fiber at
multi-index ``(i_0, ..., i_{N-1})`` with ``i_n`` removed, the column index is
``sum_{k != n} i_k * prod_{m != n, m < k} I_m``, i.e. lower modes vary
fastest. With this ordering ``unfold(X, 0) == A @ khatri_rao(C, B).T`` for a
third-order Kruskal tensor ``[[A, B, C]]``.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "as_tensor",
    "unfold",
    "fold",
    "mode_n_product",
    "multi_mode_product",
    "khatri_rao",
    "hadamard",
    "frobenius_norm",
    "inner_product",
    "mttkrp",
]


def as_tensor(x, name: str = "tensor") -> np.ndarray:
    """Validate ``x`` as a finite float64 array of order >= 1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError(f"{name} must have order >= 1, got a scalar")
    if any(s < 1 for s in arr.shape):
        raise ValueError(f"{name} has an empty extent: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _check_mode(mode: int, order: int) -> int:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < order:
        raise ValueError(f"mode must be in [0, {order - 1}], got {mode!r}")
    return int(mode)


def unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization, shape ``(I_mode, prod of other extents)``."""
    tensor = np.asarray(tensor)
    mode = _check_mode(mode, tensor.ndim)
    return np.reshape(np.moveaxis(tensor, mode, 0), (tensor.shape[mode], -1), order="F")


def fold(matrix: np.ndarray, mode: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold` for the given target ``shape``."""
    matrix = np.asarray(matrix)
    shape = tuple(int(s) for s in shape)
    mode = _check_mode(mode, len(shape))
    if matrix.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of order {matrix.ndim}")
    rest = shape[:mode] + shape[mode + 1:]
    expected = (shape[mode], int(np.prod(rest, dtype=np.int64)))
    if matrix.shape != expected:
        raise ValueError(
            f"matrix of shape {matrix.shape} cannot be folded into {shape} "
            f"along mode {mode}; expected {expected}"
        )
    full = np.reshape(matrix, (shape[mode],) + rest, order="F")
    return np.ascontiguousarray(np.moveaxis(full, 0, mode))


def mode_n_product(tensor: np.ndarray, matrix: np.ndarray, mode: int) -> np.ndarray:
    """Multiply every mode-``mode`` fiber of ``tensor`` by ``matrix``.

    The result has extent ``matrix.shape[0]`` in ``mode``; equivalently
    ``fold(matrix @ unfold(tensor, mode), mode, new_shape)``.
    """
    tensor = np.asarray(tensor)
    matrix = np.asarray(matrix)
    mode = _check_mode(mode, tensor.ndim)
    if matrix.ndim != 2 or matrix.shape[1] != tensor.shape[mode]:
        raise ValueError(
            f"cannot multiply mode {mode} of extent {tensor.shape[mode]} "
            f"by a matrix of shape {matrix.shape}"
        )
    # tensordot puts the new axis last; move it back into place.
    out = np.tensordot(tensor, matrix, axes=([mode], [1]))
    return np.ascontiguousarray(np.moveaxis(out, -1, mode))


def multi_mode_product(
    tensor: np.ndarray,
    matrices: Sequence[np.ndarray | None],
    transpose: bool = False,
) -> np.ndarray:
    """Apply ``tensor x_0 M_0 x_1 M_1 ...``, skipping ``None`` entries."""
    out = np.asarray(tensor)
    for mode, m in enumerate(matrices):
        if m is None:
            continue
        out = mode_n_product(out, m.T if transpose else m, mode)
    return out


def khatri_rao(*matrices: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product.

    ``khatri_rao(A, B)[:, r] == np.kron(A[:, r], B[:, r])``; with more
    arguments the product is taken left to right, so the last matrix's row
    index varies fastest.
    """
    if not matrices:
        raise ValueError("khatri_rao needs at least one matrix")
    mats = [np.asarray(m) for m in matrices]
    for m in mats:
        if m.ndim != 2:
            raise ValueError("khatri_rao operands must be matrices")
    ncols = mats[0].shape[1]
    if any(m.shape[1] != ncols for m in mats):
        raise ValueError(
            "khatri_rao operands need equal column counts, got "
            + ", ".join(str(m.shape[1]) for m in mats)
        )

    def _pair(a, b):
        return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], ncols)

    return reduce(_pair, mats)


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of equally sized matrices (no broadcasting)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"hadamard needs equal shapes, got {a.shape} and {b.shape}")
    return a * b


def frobenius_norm(tensor: np.ndarray) -> float:
    return float(np.linalg.norm(np.ravel(tensor)))


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"inner product needs equal shapes, got {a.shape} and {b.shape}")
    return float(np.dot(np.ravel(a), np.ravel(b)))


def mttkrp(tensor: np.ndarray, factors: Sequence[np.ndarray], mode: int) -> np.ndarray:
    """Matricized tensor times Khatri-Rao product for ``mode``.

    Returns ``unfold(tensor, mode) @ khatri_rao(*reversed(others))`` where
    ``others`` are the factors of every mode except ``mode``. Computed on the
    row-major matricization so that mode 0 needs no copy.
    """
    tensor = np.asarray(tensor)
    mode = _check_mode(mode, tensor.ndim)
    others = [f for n, f in enumerate(factors) if n != mode]
    if tensor.ndim == 1:
        rank = np.asarray(factors[0]).shape[1]
        return np.repeat(tensor[:, None], rank, axis=1)
    mat = np.moveaxis(tensor, mode, 0).reshape(tensor.shape[mode], -1)
    return mat @ khatri_rao(*others)

"""Binary tensor and Kruskal-model files.

Dense tensor (``DTEN``)::

    b"DTEN" | version u8 = 1 | dtype u8 = 0 (float64) | order N u8
    | N extents as u64 LE | prod(extents) float64 LE, row-major

Kruskal model (``KTEN``)::

    b"KTEN" | version u8 = 1 | R u64 LE | N u64 LE | N extents as u64 LE
    | R weights float64 LE | N factor matrices, each I_n x R float64 LE row-major

Trailing bytes are rejected. Writers store what they are given; callers are
expected to pass normalized models (see :func:`randcp.kruskal.normalize`).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .kruskal import KruskalTensor

__all__ = [
    "FormatError",
    "tensor_to_bytes",
    "tensor_from_bytes",
    "kruskal_to_bytes",
    "kruskal_from_bytes",
    "write_tensor",
    "read_tensor",
    "write_kruskal",
    "read_kruskal",
]

TENSOR_MAGIC = b"DTEN"
KRUSKAL_MAGIC = b"KTEN"
VERSION = 1
DTYPE_F64 = 0
_F64 = np.dtype("<f8")


class FormatError(ValueError):
    """Malformed tensor or model file."""


def tensor_to_bytes(tensor: np.ndarray) -> bytes:
    x = np.asarray(tensor, dtype=np.float64)
    if not 1 <= x.ndim <= 255:
        raise ValueError(f"order must be in [1, 255], got {x.ndim}")
    head = TENSOR_MAGIC + struct.pack("<BBB", VERSION, DTYPE_F64, x.ndim)
    head += struct.pack(f"<{x.ndim}Q", *x.shape)
    return head + np.ascontiguousarray(x, dtype=_F64).tobytes()


def tensor_from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < 7 or buf[:4] != TENSOR_MAGIC:
        raise FormatError("not a dense tensor file (bad magic)")
    version, dtype, order = struct.unpack_from("<BBB", buf, 4)
    if version != VERSION:
        raise FormatError(f"unsupported tensor file version {version}")
    if dtype != DTYPE_F64:
        raise FormatError(f"unsupported dtype code {dtype}")
    if order < 1:
        raise FormatError("tensor order must be >= 1")
    off = 7
    if len(buf) < off + 8 * order:
        raise FormatError("truncated header")
    shape = struct.unpack_from(f"<{order}Q", buf, off)
    off += 8 * order
    if any(s < 1 for s in shape):
        raise FormatError(f"invalid extents {shape}")
    count = int(np.prod(shape, dtype=object))
    if len(buf) - off != 8 * count:
        raise FormatError(
            f"payload has {len(buf) - off} bytes, expected {8 * count} for shape {shape}"
        )
    return np.frombuffer(buf, dtype=_F64, offset=off).astype(np.float64).reshape(shape)


def kruskal_to_bytes(model: KruskalTensor) -> bytes:
    rank, order = model.rank, model.ndim
    out = [KRUSKAL_MAGIC, struct.pack("<BQQ", VERSION, rank, order)]
    out.append(struct.pack(f"<{order}Q", *model.shape))
    out.append(np.ascontiguousarray(model.weights, dtype=_F64).tobytes())
    for f in model.factors:
        out.append(np.ascontiguousarray(f, dtype=_F64).tobytes())
    return b"".join(out)


def kruskal_from_bytes(buf: bytes) -> KruskalTensor:
    if len(buf) < 21 or buf[:4] != KRUSKAL_MAGIC:
        raise FormatError("not a Kruskal model file (bad magic)")
    version, rank, order = struct.unpack_from("<BQQ", buf, 4)
    if version != VERSION:
        raise FormatError(f"unsupported model file version {version}")
    if rank < 1 or order < 1:
        raise FormatError(f"invalid rank {rank} or order {order}")
    off = 21
    if len(buf) < off + 8 * order:
        raise FormatError("truncated header")
    shape = struct.unpack_from(f"<{order}Q", buf, off)
    off += 8 * order
    expected = off + 8 * rank * (1 + sum(shape))
    if len(buf) != expected:
        raise FormatError(f"model file has {len(buf)} bytes, expected {expected}")
    weights = np.frombuffer(buf, dtype=_F64, count=rank, offset=off).astype(np.float64)
    off += 8 * rank
    factors = []
    for extent in shape:
        f = np.frombuffer(buf, dtype=_F64, count=extent * rank, offset=off)
        factors.append(f.astype(np.float64).reshape(extent, rank))
        off += 8 * extent * rank
    return KruskalTensor(weights, tuple(factors))


def write_tensor(path, tensor: np.ndarray) -> None:
    Path(path).write_bytes(tensor_to_bytes(tensor))


def read_tensor(path) -> np.ndarray:
    return tensor_from_bytes(Path(path).read_bytes())


def write_kruskal(path, model: KruskalTensor) -> None:
    Path(path).write_bytes(kruskal_to_bytes(model))


def read_kruskal(path) -> KruskalTensor:
    return kruskal_from_bytes(Path(path).read_bytes())

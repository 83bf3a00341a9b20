"""CP solvers (ALS and rank-one block coordinate descent) and the
compress -> solve -> recover pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .compress import CompressConfig, compress
from .kruskal import KruskalTensor, normalize, recover, relative_error
from .tensor import as_tensor, frobenius_norm, mttkrp

__all__ = [
    "DecomposeConfig",
    "FitTrace",
    "NonFiniteError",
    "init_factors",
    "gram_pinv",
    "als_solve",
    "bcd_solve",
    "decompose",
]


class NonFiniteError(FloatingPointError):
    """A solver produced NaN or Inf; ``iteration`` says when."""

    def __init__(self, iteration: int, where: str):
        super().__init__(f"non-finite values in {where} at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class DecomposeConfig:
    """Settings for :func:`decompose` and the solvers.

    When ``randomized`` is set and ``compress`` is None, a
    :class:`CompressConfig` with ``target_rank=rank``, ``oversampling`` ``p``
    and ``power_iterations`` ``q`` is built, sharing ``seed``.
    """

    rank: int
    method: Literal["als", "bcd"] = "als"
    randomized: bool = False
    compress: CompressConfig | None = None
    tol: float = 1e-5
    max_iter: int = 500
    seed: int = 0
    p: int = 10
    q: int = 2
    init: Literal["eig", "random"] = "eig"
    inner_max_iter: int = 200

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.method not in ("als", "bcd"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1 or self.inner_max_iter < 1:
            raise ValueError("iteration limits must be positive")
        if self.init not in ("eig", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.randomized:
            if self.compress is None:
                object.__setattr__(
                    self,
                    "compress",
                    CompressConfig(self.rank, self.p, self.q, seed=self.seed),
                )
            elif self.compress.target_rank != self.rank:
                raise ValueError(
                    f"compress.target_rank={self.compress.target_rank} must equal rank={self.rank}"
                )


@dataclass
class FitTrace:
    """Per-iteration fit history.

    ``fits[i]`` and ``seconds[i]`` belong to iteration ``i + 1``; seconds are
    cumulative since the solver started. ``relative_error`` is filled in by
    :func:`decompose` against the original tensor.
    """

    fits: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    converged: bool = False
    relative_error: float = float("nan")
    total_seconds: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.fits)

    def records(self):
        return [(i + 1, f, s) for i, (f, s) in enumerate(zip(self.fits, self.seconds))]


def _gram(mat: np.ndarray) -> np.ndarray:
    # row-major matricization; X X^T does not depend on the column order
    return mat @ mat.T


def init_factors(
    tensor: np.ndarray,
    rank: int,
    seed: int = 0,
    method: Literal["eig", "random"] = "eig",
) -> list:
    """Initial factors for modes ``1..N-1``; entry 0 is ``None``.

    With ``method="eig"`` factor ``n`` holds the leading ``rank``
    eigenvectors of ``X_(n) X_(n)^T`` (eigenvalues descending). If ``rank``
    exceeds ``I_n``, the missing columns are random unit vectors drawn from
    ``seed``. ``method="random"`` draws all columns that way.
    """
    x = np.asarray(tensor, dtype=np.float64)
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    rng = np.random.default_rng(seed)
    factors: list = [None]
    for n in range(1, x.ndim):
        extent = x.shape[n]
        if method == "eig":
            mat = np.moveaxis(x, n, 0).reshape(extent, -1)
            _, vecs = np.linalg.eigh(_gram(mat))
            block = vecs[:, ::-1][:, : min(rank, extent)]
        else:
            block = np.empty((extent, 0))
        missing = rank - block.shape[1]
        if missing > 0:
            pad = rng.standard_normal((extent, missing))
            pad /= np.linalg.norm(pad, axis=0)
            block = np.hstack([block, pad])
        factors.append(np.ascontiguousarray(block))
    return factors


def gram_pinv(v: np.ndarray) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric PSD ``R x R`` matrix.

    Eigenvalues below ``R * eps * max_eigenvalue`` are treated as zero.
    """
    w, u = np.linalg.eigh(v)
    top = w.max() if w.size else 0.0
    if top <= 0:
        return np.zeros_like(v)
    keep = w > v.shape[0] * np.finfo(float).eps * top
    return (u[:, keep] / w[keep]) @ u[:, keep].T


def _unit_columns(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(f, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return f / safe, norms


def _check_finite(iteration: int, where: str, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteError(iteration, where)


def _prepare(tensor, cfg: DecomposeConfig):
    x = as_tensor(tensor)
    norm_x = frobenius_norm(x)
    if norm_x == 0:
        raise ValueError("input tensor has zero norm")
    factors = init_factors(x, cfg.rank, cfg.seed, cfg.init)
    factors[0] = np.zeros((x.shape[0], cfg.rank))
    return x, norm_x, factors


def als_solve(tensor: np.ndarray, cfg: DecomposeConfig) -> tuple[KruskalTensor, FitTrace]:
    """Fit a rank-``cfg.rank`` CP model by alternating least squares.

    Modes are updated in ascending order. Each update solves the normal
    equations ``F_n = X_(n) KR (*_{m != n} F_m^T F_m)^+`` where ``KR`` is the
    Khatri-Rao product of the other factors; factors of modes ``0..N-2`` are
    then scaled to unit columns and the column norms of the last factor
    become the weights. Stops when the fit changes by less than ``cfg.tol``.
    """
    x, norm_x, factors = _prepare(tensor, cfg)
    order = x.ndim
    rank = cfg.rank
    weights = np.ones(rank)
    grams = [None] + [f.T @ f for f in factors[1:]]

    trace = FitTrace()
    start = time.perf_counter()
    best = (-np.inf, None)
    fit_old = None
    for it in range(1, cfg.max_iter + 1):
        for n in range(order):
            v = np.ones((rank, rank))
            for m in range(order):
                if m != n:
                    v *= grams[m]
            mk = mttkrp(x, factors, n)
            f = mk @ gram_pinv(v)
            _check_finite(it, f"factor {n}", f)
            f, norms = _unit_columns(f)
            if n == order - 1:
                weights = norms
                last_mk = mk
            factors[n] = f
            grams[n] = f.T @ f

        # <X, Xhat> reuses the last MTTKRP; ||Xhat||^2 uses the Gram matrices.
        inner = float(np.sum(last_mk * factors[-1], axis=0) @ weights)
        v = np.ones((rank, rank))
        for g in grams:
            v *= g
        norm_hat_sq = float(weights @ v @ weights)
        fit = 1.0 - (norm_x**2 + norm_hat_sq - 2.0 * inner) / norm_x**2
        _check_finite(it, "fit", fit)
        trace.fits.append(fit)
        trace.seconds.append(time.perf_counter() - start)
        if fit > best[0]:
            best = (fit, (weights.copy(), [f.copy() for f in factors]))
        if fit_old is not None and abs(fit - fit_old) < cfg.tol:
            trace.converged = True
            break
        fit_old = fit

    if trace.converged:
        model = KruskalTensor(weights, tuple(factors))
    else:
        model = KruskalTensor(best[1][0], tuple(best[1][1]))
    trace.total_seconds = time.perf_counter() - start
    return normalize(model), trace


def _outer(weight: float, vectors) -> np.ndarray:
    out = np.asarray(weight * vectors[0])
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def bcd_solve(tensor: np.ndarray, cfg: DecomposeConfig) -> tuple[KruskalTensor, FitTrace]:
    """Fit a CP model by block coordinate descent over rank-one components.

    The first sweep is successive rank-one deflation: component ``r`` is fit
    to the residual of components ``0..r-1`` by rank-one ALS, iterated until
    the residual fit changes by less than ``cfg.tol`` (at most
    ``cfg.inner_max_iter`` times), and the residual is then updated. Later
    sweeps refit each component against the residual of all the others.
    Sweeps stop when the fit of the full model changes by less than
    ``cfg.tol``; each sweep counts as one iteration.
    """
    x, norm_x, init = _prepare(tensor, cfg)
    order = x.ndim
    rank = cfg.rank
    cols = [[f[:, r].copy() for f in init] for r in range(rank)]
    weights = np.zeros(rank)
    active = np.zeros(rank, dtype=bool)
    residual = x.copy()

    trace = FitTrace()
    start = time.perf_counter()
    best = (-np.inf, None)
    fit_old = None
    for it in range(1, cfg.max_iter + 1):
        for r in range(rank):
            vecs = cols[r]
            if active[r]:
                residual += _outer(weights[r], vecs)
            y = residual
            norm_y_sq = float(np.vdot(y, y))
            lam = 0.0
            inner_old = None
            if norm_y_sq > 0:
                for _ in range(cfg.inner_max_iter):
                    for n in range(order):
                        # the other blocks are unit vectors except the first
                        # pass over mode 0, so divide by their squared norms
                        denom = 1.0
                        for m in range(order):
                            if m != n:
                                denom *= float(vecs[m] @ vecs[m])
                        g = mttkrp(y, [v[:, None] for v in vecs], n)[:, 0]
                        g = g / denom if denom > 0 else g
                        norm = float(np.linalg.norm(g))
                        if n == order - 1:
                            lam = norm
                        vecs[n] = g / norm if norm > 0 else g
                    _check_finite(it, f"component {r}", *vecs)
                    # ||Y - lam a o b o c||^2 = ||Y||^2 - lam^2 for unit vectors
                    inner_fit = lam**2 / norm_y_sq
                    if inner_old is not None and abs(inner_fit - inner_old) < cfg.tol:
                        break
                    inner_old = inner_fit
            weights[r] = lam
            active[r] = True
            residual -= _outer(lam, vecs)

        fit = 1.0 - float(np.vdot(residual, residual)) / norm_x**2
        _check_finite(it, "fit", fit)
        trace.fits.append(fit)
        trace.seconds.append(time.perf_counter() - start)
        if fit > best[0]:
            best = (fit, (weights.copy(), [[v.copy() for v in c] for c in cols]))
        if fit_old is not None and abs(fit - fit_old) < cfg.tol:
            trace.converged = True
            break
        fit_old = fit

    w, c = (weights, cols) if trace.converged else best[1]
    factors = tuple(np.column_stack([c[r][n] for r in range(rank)]) for n in range(order))
    trace.total_seconds = time.perf_counter() - start
    return normalize(KruskalTensor(w, factors)), trace


_SOLVERS = {"als": als_solve, "bcd": bcd_solve}


def decompose(tensor: np.ndarray, cfg: DecomposeConfig) -> tuple[KruskalTensor, FitTrace]:
    """Rank-``cfg.rank`` CP decomposition, optionally randomized.

    Randomized: compress, solve on the compressed tensor, map the factors
    back through the bases and normalize. The trace's ``relative_error`` is
    always measured against ``tensor`` itself.
    """
    x = as_tensor(tensor)
    solve = _SOLVERS[cfg.method]
    start = time.perf_counter()
    if cfg.randomized:
        result = compress(x, cfg.compress)
        small, trace = solve(result.compressed, cfg)
        model = recover(small, result.bases)
    else:
        small, trace = solve(x, cfg)
        model = recover(small, [np.eye(s) for s in x.shape])
    trace.total_seconds = time.perf_counter() - start
    trace.relative_error = relative_error(x, model)
    return model, trace


def deterministic(cfg: DecomposeConfig) -> DecomposeConfig:
    """Same settings with compression switched off."""
    return replace(cfg, randomized=False, compress=None)

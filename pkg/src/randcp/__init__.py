"""Randomized CP (CANDECOMP/PARAFAC) tensor decomposition.

Compress a dense tensor with randomized range finders, fit a CP model on the
small tensor by ALS or rank-one block coordinate descent, and map the
factors back to full size.
"""

from .compress import CompressConfig, CompressionResult, compress, projection_residual
from .diagnostics import (
    BenchRecord,
    BenchSpec,
    BoundReport,
    bench_sweep,
    compression_ratio_cp,
    compression_ratio_svd,
    expected_error_bound,
    validate_bound,
    validate_bound_sweep,
)
from .kruskal import KruskalTensor, fit, normalize, reconstruct, recover, relative_error
from .solvers import (
    DecomposeConfig,
    FitTrace,
    NonFiniteError,
    als_solve,
    bcd_solve,
    decompose,
    init_factors,
)
from .synthetic import NoiseSpec, add_noise, random_lowrank, toy_video
from .tensor import (
    fold,
    frobenius_norm,
    hadamard,
    inner_product,
    khatri_rao,
    mode_n_product,
    mttkrp,
    unfold,
)

__version__ = "0.1.0"

import numpy as np
import pytest

from randcp.compress import CompressConfig, compress, mode_rng, projection_residual, range_basis
from randcp.synthetic import NoiseSpec, add_noise, derive_seed, random_lowrank
from randcp.tensor import frobenius_norm, unfold


def test_exact_rank_is_captured():
    x, _ = random_lowrank((30, 30, 30), 5, seed=3)
    res = compress(x, CompressConfig(5, 10, 2, seed=1))
    assert res.compressed.shape == (15, 15, 15)
    assert projection_residual(x, res) <= 1e-10 * frobenius_norm(x)
    assert all(r == 5 for r in res.sketch_ranks)


def test_empty_modes_is_identity(rng):
    x = rng.standard_normal((20, 20, 20))
    res = compress(x, CompressConfig(3, 2, 1, modes=[]))
    assert res.compressed_modes == (False, False, False)
    np.testing.assert_array_equal(res.compressed, x)
    for q, s in zip(res.bases, x.shape):
        np.testing.assert_array_equal(q, np.eye(s))


def test_wide_sketch_leaves_mode_uncompressed(rng):
    x = rng.standard_normal((8, 30, 30))
    res = compress(x, CompressConfig(5, 5, 1))
    assert res.compressed_modes == (False, True, True)
    assert res.compressed.shape == (8, 10, 10)


def test_selected_modes_only(rng):
    x = rng.standard_normal((20, 20, 20))
    res = compress(x, CompressConfig(3, 2, 1, modes=[1]))
    assert res.compressed_modes == (False, True, False)
    assert res.compressed.shape == (20, 5, 20)


def test_bad_mode_rejected(rng):
    with pytest.raises(ValueError):
        compress(rng.standard_normal((4, 4)), CompressConfig(1, 1, 0, modes=[2]))


@pytest.mark.parametrize(
    "kwargs",
    [dict(target_rank=0), dict(target_rank=2, oversampling=-1),
     dict(target_rank=2, power_iterations=-1), dict(target_rank=2, distribution="cauchy"),
     dict(target_rank=2, stabilizer="svd"), dict(target_rank=2, seed=-1)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        CompressConfig(**kwargs)


def test_same_seed_bit_identical(rng):
    x = rng.standard_normal((25, 25, 25))
    cfg = CompressConfig(4, 5, 2, seed=77)
    a, b = compress(x, cfg), compress(x, cfg)
    assert a.compressed.tobytes() == b.compressed.tobytes()
    for qa, qb in zip(a.bases, b.bases):
        assert qa.tobytes() == qb.tobytes()
    c = compress(x, CompressConfig(4, 5, 2, seed=78))
    assert not np.array_equal(a.compressed, c.compressed)


def test_mode_streams_are_independent_of_mode_selection(rng):
    x = rng.standard_normal((25, 25, 25))
    full = compress(x, CompressConfig(4, 5, 0, seed=5))
    only_first = compress(x, CompressConfig(4, 5, 0, seed=5, modes=[0]))
    np.testing.assert_array_equal(full.bases[0], only_first.bases[0])
    a = mode_rng(5, 2).standard_normal(3)
    b = mode_rng(5, 2).standard_normal(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, mode_rng(5, 1).standard_normal(3))


@pytest.mark.parametrize("distribution", ["gaussian", "uniform"])
@pytest.mark.parametrize("stabilizer", ["lu", "qr"])
def test_bases_orthonormal(rng, distribution, stabilizer):
    x = add_noise(random_lowrank((30, 25, 20), 4, seed=2)[0], NoiseSpec(2.0, 9))
    res = compress(x, CompressConfig(4, 5, 3, distribution=distribution, stabilizer=stabilizer))
    for q in res.bases:
        np.testing.assert_allclose(q.T @ q, np.eye(q.shape[1]), atol=1e-10)


def test_stabilizers_span_the_same_space(rng):
    a = rng.standard_normal((40, 6)) @ rng.standard_normal((6, 50))
    qa, _ = range_basis(a, 8, 2, np.random.default_rng(0), stabilizer="lu")
    qb, _ = range_basis(a, 8, 2, np.random.default_rng(0), stabilizer="qr")
    assert np.linalg.norm(a - qa @ (qa.T @ a)) <= 1e-10 * np.linalg.norm(a)
    assert np.linalg.norm(a - qb @ (qb.T @ a)) <= 1e-10 * np.linalg.norm(a)


def test_sketch_rank_reports_collapse(rng):
    a = rng.standard_normal((40, 3)) @ rng.standard_normal((3, 50))
    _, rank = range_basis(a, 8, 0, rng)
    assert rank == 3


def test_compressed_entries_equal_explicit_projection(rng):
    x = rng.standard_normal((12, 13, 14))
    res = compress(x, CompressConfig(3, 2, 1))
    expected = np.einsum("ijk,ia,jb,kc->abc", x, *res.bases)
    np.testing.assert_allclose(res.compressed, expected, atol=1e-12)


def test_per_mode_residual_inequality(rng):
    x = add_noise(random_lowrank((20, 22, 24), 6, seed=4)[0], NoiseSpec(1.0, 8))
    res = compress(x, CompressConfig(3, 2, 0, seed=11))
    per_mode = [
        np.linalg.norm(unfold(x, n) - q @ (q.T @ unfold(x, n))) ** 2
        for n, q in enumerate(res.bases)
    ]
    resid = projection_residual(x, res)
    assert resid**2 <= sum(per_mode) * (1 + 1e-12)
    assert resid <= sum(np.sqrt(per_mode))


def test_project_back_matches_projection(rng):
    x = rng.standard_normal((12, 13, 14))
    res = compress(x, CompressConfig(3, 2, 1))
    resid = frobenius_norm(x - res.project_back())
    assert resid == pytest.approx(projection_residual(x, res), rel=1e-10)


def _mean_residual(q, p, seeds):
    out = []
    for s in seeds:
        x = add_noise(random_lowrank((40, 40, 40), 5, seed=s)[0], NoiseSpec(2.0, derive_seed(s, 1)))
        res = compress(x, CompressConfig(5, p, q, seed=s))
        out.append(projection_residual(x, res) / frobenius_norm(x))
    return float(np.mean(out))


def test_power_iterations_reduce_mean_residual():
    seeds = range(20)
    assert _mean_residual(2, 10, seeds) <= _mean_residual(0, 10, seeds)


def test_oversampling_reduces_mean_residual():
    seeds = range(20)
    assert _mean_residual(0, 10, seeds) <= _mean_residual(0, 0, seeds)

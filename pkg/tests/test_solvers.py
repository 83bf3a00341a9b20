import numpy as np
import pytest

from randcp.compress import CompressConfig
from randcp.kruskal import KruskalTensor, normalize, reconstruct
from randcp.solvers import (
    DecomposeConfig,
    NonFiniteError,
    als_solve,
    bcd_solve,
    decompose,
    deterministic,
    gram_pinv,
    init_factors,
)
from randcp.synthetic import NoiseSpec, add_noise, derive_seed, random_lowrank
from randcp.tensor import khatri_rao

from conftest import random_orthonormal


def assert_same_model(a, b, atol):
    np.testing.assert_allclose(a.weights, b.weights, rtol=atol, atol=atol)
    for fa, fb in zip(a.factors, b.factors):
        np.testing.assert_allclose(fa, fb, atol=atol)


def test_gram_identity(rng):
    a = rng.standard_normal((6, 4))
    b = rng.standard_normal((5, 4))
    kr = khatri_rao(a, b)
    np.testing.assert_allclose(kr.T @ kr, (a.T @ a) * (b.T @ b), rtol=1e-12, atol=1e-12)


def test_gram_pinv(rng):
    a = rng.standard_normal((10, 4))
    v = a.T @ a
    np.testing.assert_allclose(gram_pinv(v), np.linalg.inv(v), rtol=1e-8)
    singular = np.outer(a[0], a[0])
    np.testing.assert_allclose(gram_pinv(singular), np.linalg.pinv(singular), atol=1e-12)
    assert not np.any(gram_pinv(np.zeros((3, 3))))


@pytest.mark.parametrize(
    "kwargs",
    [dict(rank=0), dict(rank=2, tol=0.0), dict(rank=2, method="newton"),
     dict(rank=2, max_iter=0), dict(rank=2, init="svd"),
     dict(rank=2, randomized=True, compress=CompressConfig(3))],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        DecomposeConfig(**kwargs)


def test_randomized_config_builds_compression():
    cfg = DecomposeConfig(4, randomized=True, p=3, q=1, seed=9)
    assert cfg.compress == CompressConfig(4, 3, 1, seed=9)
    assert deterministic(cfg).compress is None


def test_init_diagonal_gram():
    # mode-1 fibers along e_2 (norm 3) and e_0 (norm 1): Gram = diag(1, 0, 9)
    t = np.zeros((2, 3, 2))
    t[0, 2, 0] = 3.0
    t[1, 0, 1] = 1.0
    f = init_factors(t, 2)[1]
    np.testing.assert_allclose(np.abs(f[:, 0]), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(np.abs(f[:, 1]), [1, 0, 0], atol=1e-15)


def test_init_orthonormal_and_first_is_none(rng):
    t = rng.standard_normal((5, 6, 7))
    fs = init_factors(t, 4)
    assert fs[0] is None
    for f in fs[1:]:
        np.testing.assert_allclose(f.T @ f, np.eye(4), atol=1e-10)


def test_init_padding_deterministic(rng):
    t = rng.standard_normal((5, 3, 4))
    a = init_factors(t, 6, seed=4)
    b = init_factors(t, 6, seed=4)
    for fa, fb in zip(a[1:], b[1:]):
        np.testing.assert_array_equal(fa, fb)
        np.testing.assert_allclose(np.linalg.norm(fa, axis=0), 1.0)
    c = init_factors(t, 6, seed=5)
    assert not np.array_equal(a[1], c[1])


def test_random_init_option(rng):
    t = rng.standard_normal((5, 6, 7))
    fs = init_factors(t, 3, seed=1, method="random")
    assert fs[1].shape == (6, 3)
    np.testing.assert_allclose(np.linalg.norm(fs[2], axis=0), 1.0)


def test_als_exact_recovery_20_cubed():
    x, _ = random_lowrank((20, 20, 20), 3, seed=0)
    _, trace = als_solve(x, DecomposeConfig(3, tol=1e-10))
    assert trace.fits[-1] >= 1 - 1e-6
    assert trace.converged


@pytest.mark.parametrize("solver", [als_solve, bcd_solve])
def test_rank_one_recovery(rng, solver):
    vecs = [v / np.linalg.norm(v) for v in (rng.standard_normal(s) for s in (6, 7, 8))]
    truth = normalize(KruskalTensor([2.5], tuple(v[:, None] for v in vecs)))
    model, _ = solver(reconstruct(truth), DecomposeConfig(1))
    assert abs(model.weights[0] - 2.5) <= 1e-8
    assert_same_model(model, truth, 1e-6)


def test_bcd_orthogonal_components(rng):
    factors = tuple(random_orthonormal(rng, s, 2) for s in (8, 9, 10))
    truth = normalize(KruskalTensor([3.0, 1.5], factors))
    model, trace = bcd_solve(reconstruct(truth), DecomposeConfig(2, "bcd"))
    assert trace.converged
    assert_same_model(model, truth, 1e-5)


@pytest.mark.parametrize("method", ["als", "bcd"])
def test_returns_canonical_model(method):
    x = add_noise(random_lowrank((10, 11, 12), 3, seed=1)[0], NoiseSpec(2.0, 5))
    model, _ = decompose(x, DecomposeConfig(3, method, max_iter=30))
    assert np.all(np.diff(model.weights) <= 0) and np.all(model.weights >= 0)
    for f in model.factors:
        np.testing.assert_allclose(np.linalg.norm(f, axis=0), 1.0, atol=1e-12)


def test_als_fit_monotone_on_exact_rank():
    x, _ = random_lowrank((15, 16, 17), 4, seed=6)
    _, trace = als_solve(x, DecomposeConfig(4, tol=1e-12, max_iter=200))
    assert np.all(np.diff(trace.fits) >= -1e-12)


def test_als_fit_monotone_on_noisy_input():
    x = add_noise(random_lowrank((15, 16, 17), 4, seed=6)[0], NoiseSpec(1.0, 3))
    _, trace = als_solve(x, DecomposeConfig(4, tol=1e-12, max_iter=200))
    assert np.all(np.diff(trace.fits) >= -1e-10)


def test_max_iter_returns_best_without_converging():
    x = add_noise(random_lowrank((10, 10, 10), 3, seed=2)[0], NoiseSpec(1.0, 4))
    model, trace = decompose(x, DecomposeConfig(3, max_iter=2, tol=1e-14))
    assert not trace.converged
    assert trace.iterations == 2
    assert model.rank == 3


def test_trace_timings(rng):
    x = rng.standard_normal((6, 7, 8))
    _, trace = decompose(x, DecomposeConfig(2, max_iter=5))
    assert trace.iterations <= 5
    assert all(s >= 0 for s in trace.seconds)
    assert trace.seconds == sorted(trace.seconds)
    assert [r[0] for r in trace.records()] == list(range(1, trace.iterations + 1))


def test_zero_tensor_rejected():
    with pytest.raises(ValueError):
        decompose(np.zeros((3, 3, 3)), DecomposeConfig(1))


def test_non_finite_reports_iteration():
    # finite input whose squared norm overflows
    x = np.full((3, 3, 3), 1e300)
    with pytest.raises(NonFiniteError) as info, np.errstate(over="ignore", invalid="ignore"):
        als_solve(x, DecomposeConfig(1, init="random"))
    assert info.value.iteration == 1


@pytest.mark.parametrize("method", ["als", "bcd"])
def test_empty_modes_matches_deterministic(method):
    x = add_noise(random_lowrank((12, 12, 12), 3, seed=8)[0], NoiseSpec(3.0, 1))
    cfg = DecomposeConfig(3, method, True, compress=CompressConfig(3, modes=[]), seed=2)
    a, ta = decompose(x, cfg)
    b, tb = decompose(x, deterministic(cfg))
    assert ta.fits == tb.fits
    assert_same_model(a, b, 0.0)


@pytest.mark.parametrize("method, limit", [("als", 1e-6), ("bcd", 1e-5)])
def test_randomized_exact_recovery(method, limit):
    x, _ = random_lowrank((40, 40, 40), 5, seed=3)
    _, trace = decompose(x, DecomposeConfig(5, method, True, tol=1e-10))
    assert trace.relative_error <= limit


def test_randomized_matches_deterministic():
    x, _ = random_lowrank((30, 30, 30), 4, seed=10)
    cfg = DecomposeConfig(4, randomized=True, tol=1e-10)
    _, tr = decompose(x, cfg)
    _, td = decompose(x, deterministic(cfg))
    assert abs(tr.relative_error - td.relative_error) <= 1e-4


@pytest.mark.parametrize("method", ["als", "bcd"])
def test_seed_determinism(method):
    x = add_noise(random_lowrank((20, 20, 20), 3, seed=4)[0], NoiseSpec(2.0, 2))
    cfg = DecomposeConfig(3, method, True, seed=12)
    a, ta = decompose(x, cfg)
    b, tb = decompose(x, cfg)
    assert ta.fits == tb.fits
    assert a.weights.tobytes() == b.weights.tobytes()
    for fa, fb in zip(a.factors, b.factors):
        assert fa.tobytes() == fb.tobytes()


def test_four_way_als():
    x, _ = random_lowrank((8, 9, 10, 11), 3, seed=1)
    _, trace = decompose(x, DecomposeConfig(3, tol=1e-10))
    assert trace.relative_error <= 1e-5


def test_power_iterations_improve_pipeline_mean():
    errs = {0: [], 2: []}
    for s in range(20):
        clean, _ = random_lowrank((30, 30, 30), 4, seed=s)
        x = add_noise(clean, NoiseSpec(2.0, derive_seed(s, 1)))
        for q in errs:
            _, trace = decompose(x, DecomposeConfig(4, randomized=True, p=4, q=q, seed=s))
            errs[q].append(trace.relative_error)
    assert np.mean(errs[2]) <= np.mean(errs[0])

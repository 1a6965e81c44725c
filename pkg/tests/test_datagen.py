import numpy as np
import pytest
from scipy.optimize import nnls as scipy_nnls

from rnmf import datagen
from rnmf.errors import BadShape
from rnmf.extraction import dedup
from rnmf.oracle import brute_force_rays, nnls


@pytest.mark.parametrize("shape", [(5, 10, 1), (5, 10, 6), (5, 5, 5), (3, 10, 4)])
def test_bad_shapes(shape):
    with pytest.raises(BadShape):
        datagen.generate(*shape)


def test_table_shape():
    ds = datagen.generate(25, 100, 25, seed=0)
    assert ds.X.shape == (25, 100)
    assert ds.truth == tuple(range(25))
    np.testing.assert_allclose(np.linalg.norm(ds.X, axis=0), 1.0, atol=1e-12)
    assert ds.X.min() >= 0


def test_l1_normalization():
    ds = datagen.generate(6, 12, 3, seed=2, norm_kind="l1")
    np.testing.assert_allclose(ds.X.sum(axis=0), 1.0, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_mixtures_lie_in_ray_cone(seed):
    ds = datagen.generate(10, 30, 5, seed)
    F = ds.X[:, list(ds.truth)]
    for j in range(ds.r, ds.n):
        assert nnls(F, ds.X[:, j]).residual <= 1e-8
    assert np.max(np.abs(F @ ds.W_true - ds.X)) <= 1e-10
    assert ds.W_true.min() >= 0


def test_mixing_support_sizes():
    ds = datagen.generate(8, 200, 5, seed=1)
    k = (ds.W_true[:, ds.r:] > 0).sum(axis=0)
    assert k.min() >= 2 and k.max() <= 5
    assert set(k) == {2, 3, 4, 5}


def test_deterministic():
    a, b = datagen.generate(7, 20, 4, 42), datagen.generate(7, 20, 4, 42)
    assert a.X.tobytes() == b.X.tobytes()
    assert not np.array_equal(a.X, datagen.generate(7, 20, 4, 43).X)


@pytest.mark.parametrize("seed", range(5))
def test_rays_are_separated(seed):
    ds = datagen.generate(6, 15, 4, seed)
    F = ds.X[:, list(ds.truth)]
    assert np.all(datagen.ray_margins(F) > datagen.RAY_MARGIN)
    for i in range(ds.r):
        assert scipy_nnls(np.delete(F, i, axis=1), F[:, i])[1] > 1e-3


@pytest.mark.parametrize("seed", range(6))
def test_brute_force_finds_truth(seed):
    ds = datagen.generate(5, 11, 3, seed)
    loo = brute_force_rays(ds.X)
    assert loo == set(ds.truth)
    assert brute_force_rays(ds.X, mode="exhaustive") == loo


def test_noise_small_at_high_snr():
    ds = datagen.generate(25, 100, 25, seed=0)
    noisy = datagen.with_noise(ds, 50.0)
    assert noisy.snr_db == 50.0
    assert np.median(np.abs(noisy.X - ds.X)) <= 0.01
    assert noisy.X.min() >= 0
    np.testing.assert_allclose(np.linalg.norm(noisy.X, axis=0), 1.0, atol=1e-12)
    assert 0 <= noisy.clamp_fraction < 0.05


def test_noise_clamp_grows_as_snr_drops():
    ds = datagen.generate(25, 100, 25, seed=0)
    lo, hi = datagen.with_noise(ds, 0.0), datagen.with_noise(ds, 30.0)
    assert lo.clamp_fraction > hi.clamp_fraction


def test_no_noise_is_identity():
    ds = datagen.generate(5, 10, 3, 0)
    out = datagen.with_noise(ds, float("inf"))
    assert out.X.tobytes() == ds.X.tobytes()


def test_zero_jitter_gives_exact_copies():
    ds = datagen.generate(5, 10, 3, 0)
    dup = datagen.with_duplicates(ds, 2, 0.0)
    assert dup.n == 10 + 3 * 2
    for g in dup.duplicate_groups:
        for c in g[1:]:
            np.testing.assert_allclose(dup.X[:, c], dup.X[:, g[0]], atol=1e-15)


def test_duplicate_layout():
    ds = datagen.generate(6, 12, 3, 1)
    dup = datagen.with_duplicates(ds, 3, 0.02)
    assert dup.duplicate_groups == ((0, 12, 13, 14), (1, 15, 16, 17), (2, 18, 19, 20))
    np.testing.assert_array_equal(dup.X[:, :12], ds.X)
    for g in dup.duplicate_groups:
        d = np.linalg.norm(dup.X[:, list(g[1:])] - dup.X[:, [g[0]]], axis=0)
        assert np.all(d < 0.05)
    assert dup.metadata()["duplicate_groups"][0] == [0, 12, 13, 14]
    with pytest.raises(ValueError):
        datagen.with_duplicates(ds, 0, 0.1)
    with pytest.raises(ValueError):
        datagen.with_duplicates(ds, 1, -0.1)


@pytest.mark.parametrize("seed", range(5))
def test_dedup_undoes_duplication(seed):
    ds = datagen.generate(10, 20, 4, seed)
    D = np.linalg.norm(ds.X[:, :, None] - ds.X[:, None, :], axis=0)
    sep = np.min(D[~np.eye(ds.n, dtype=bool)])
    if sep < 0.01:
        pytest.skip("originals too close for a meaningful gamma")
    gamma = sep / 2
    dup = datagen.with_duplicates(ds, 3, gamma / 4)
    _, kept = dedup(dup.X, gamma)
    assert kept == list(range(ds.n))

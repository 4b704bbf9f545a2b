import numpy as np
import pytest

from igopca.baseline import l2_fit, l2_reconstruct
from igopca.errors import DimensionError, RankError


def test_two_images_rank_one(rng):
    a = rng.random((6, 6))
    direction = rng.random((6, 6))
    b = a + direction
    model = l2_fit([a, b], 1)
    d = direction.ravel() / np.linalg.norm(direction)
    assert abs(abs(model.basis[:, 0] @ d) - 1.0) <= 1e-10
    for img in (a, b):
        np.testing.assert_allclose(l2_reconstruct(model, img), img, atol=1e-10)


def test_identical_images_rank_error(rng):
    a = rng.random((5, 5))
    with pytest.raises(RankError):
        l2_fit([a, a, a], 1)


def test_k_must_be_below_n(rng):
    with pytest.raises(RankError):
        l2_fit([rng.random((4, 4)) for _ in range(3)], 3)


def test_residual_matches_tail_eigenvalues(rng):
    imgs = rng.random((20, 8, 8))
    model = l2_fit(imgs, 5)
    X = imgs.reshape(20, -1).T
    Xc = X - X.mean(axis=1, keepdims=True)
    B = model.basis
    err = np.linalg.norm(Xc - B @ (B.T @ Xc)) ** 2
    tail = np.sort(np.linalg.eigvalsh(Xc.T @ Xc))[::-1][5:].sum()  # independent oracle
    assert err == pytest.approx(tail, rel=1e-8)


def test_full_rank_reproduces_training(rng):
    imgs = rng.random((4, 5, 5))
    model = l2_fit(imgs, 3)
    for img in imgs:
        np.testing.assert_allclose(l2_reconstruct(model, img), img, atol=1e-8)


def test_mean_maps_to_itself(rng):
    imgs = rng.random((6, 5, 5))
    model = l2_fit(imgs, 2)
    mean = model.mean.reshape(5, 5)
    assert np.array_equal(l2_reconstruct(model, mean), mean)


def test_residual_orthogonal_to_basis(rng):
    model = l2_fit(rng.random((10, 7, 7)), 4)
    x = rng.random((7, 7)) * 3
    r = (x - l2_reconstruct(model, x)).ravel()
    assert np.linalg.norm(model.basis.T @ r) <= 1e-8 * np.linalg.norm(x)


def test_orthonormal_basis(rng):
    B = l2_fit(rng.random((12, 6, 6)), 6).basis
    assert np.abs(B.T @ B - np.eye(6)).max() <= 1e-9


def test_error_monotone_in_k(rng):
    imgs = rng.random((10, 6, 6))
    errs = []
    for k in range(1, 10):
        model = l2_fit(imgs, k)
        errs.append(sum(np.sum((l2_reconstruct(model, x) - x) ** 2) for x in imgs))
    assert np.all(np.diff(errs) <= 1e-10)


def test_idempotent(rng):
    model = l2_fit(rng.random((8, 6, 6)), 3)
    once = l2_reconstruct(model, rng.random((6, 6)))
    np.testing.assert_allclose(l2_reconstruct(model, once), once, atol=1e-10)


def test_dimension_mismatch(rng):
    model = l2_fit(rng.random((4, 5, 5)), 2)
    with pytest.raises(DimensionError):
        l2_reconstruct(model, rng.random((5, 6)))

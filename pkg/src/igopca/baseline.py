"""Mean-centred l2 PCA of pixel intensities, used as the comparison baseline."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DimensionError, RankError
from .linalg import snapshot_pca
from .orientation import check_gray_image
from .validation import check_gray_stack, check_is_fitted


@dataclass(frozen=True, eq=False)
class L2Model:
    mean: np.ndarray  # (p,)
    basis: np.ndarray  # (p, k), orthonormal columns
    eigenvalues: np.ndarray
    height: int
    width: int
    spectrum: np.ndarray = None

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def k(self):
        return self.basis.shape[1]

    @property
    def p(self):
        return self.basis.shape[0]


def l2_fit(images, k, serial=False):
    """Fit l2 PCA with ``1 <= k < n`` components through the snapshot method."""
    X = check_gray_stack(images)
    n = X.shape[0]
    if n < 2:
        raise DimensionError("l2 PCA needs at least two images")
    if not 1 <= k < n:
        raise RankError(f"k={k} must satisfy 1 <= k < n={n}")
    h, w = X.shape[1:]
    D = X.reshape(n, -1).T  # (p, n)
    mean = D.mean(axis=1)
    # rounding residue left by centering is judged against the raw data energy
    energy = float(np.max(np.sum(D * D, axis=0)))
    sub = snapshot_pca(D - mean[:, np.newaxis], k, serial=serial, reference=energy)
    return L2Model(mean, np.real(sub.basis).copy(), sub.eigenvalues, h, w, sub.spectrum)


def l2_project(model, D):
    """``mean + B B^T (D - mean)`` for a (p, n) block of vectorised images."""
    m = model.mean[:, np.newaxis]
    B = model.basis
    return m + B @ (B.T @ (D - m))


def l2_reconstruct(model, img):
    img = check_gray_image(img)
    if img.shape != model.shape:
        raise DimensionError(f"image shape {img.shape} does not match model shape {model.shape}")
    return l2_project(model, img.reshape(-1, 1))[:, 0].reshape(model.shape)


class L2PCA(TransformerMixin, BaseEstimator):
    """l2 PCA on stacks of grayscale images of shape (n, m1, m2)."""

    def __init__(self, n_components=5, serial=False):
        self.n_components = n_components
        self.serial = serial

    def fit(self, X, y=None):
        self.model_ = l2_fit(X, self.n_components, self.serial)
        return self

    @property
    def components_(self):
        check_is_fitted(self)
        return self.model_.basis.T

    @property
    def explained_variance_(self):
        check_is_fitted(self)
        return self.model_.eigenvalues

    def transform(self, X):
        check_is_fitted(self)
        X = check_gray_stack(X, self.model_.shape)
        D = X.reshape(X.shape[0], -1).T - self.model_.mean[:, np.newaxis]
        return (self.model_.basis.T @ D).T

    def inverse_transform(self, C):
        check_is_fitted(self)
        C = np.atleast_2d(np.asarray(C, dtype=np.float64))
        D = self.model_.basis @ C.T + self.model_.mean[:, np.newaxis]
        return D.T.reshape((-1,) + self.model_.shape)

"""PCA of image gradient orientations.

Orientation images are embedded as ``z = exp(j*phi)`` and linear complex PCA
is run on the columns of ``Z = [z_1 | ... | z_n]`` with the snapshot method.
Reconstruction projects onto the principal subspace and keeps only the angle
of the result.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DimensionError, RankError
from .linalg import PrincipalSubspace, snapshot_pca
from .orientation import GradientFilterSpec, embed, unembed
from .validation import check_is_fitted, check_orientation_stack

DEFAULT_MODULUS_FLOOR = 1e-6
OUTLIER_ALIGNMENT_THRESHOLD = 0.9


@dataclass(frozen=True, eq=False)
class IgoModel:
    subspace: PrincipalSubspace
    filter: GradientFilterSpec
    height: int
    width: int
    mean: np.ndarray = None  # only set when fitted with centering

    def __post_init__(self):
        if self.subspace.p != self.height * self.width:
            raise DimensionError(
                f"basis has {self.subspace.p} rows but image is {self.height}x{self.width}"
            )

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def basis(self):
        return self.subspace.basis

    @property
    def k(self):
        return self.subspace.k

    @property
    def p(self):
        return self.subspace.p


def embedding_matrix(images):
    """Columns ``z_i = exp(j*phi_i)``, shape (p, n)."""
    return np.column_stack([embed(phi) for phi in images])


def fit(images, k, filter_spec=None, center=False, serial=False):
    """Estimate the k-dimensional principal subspace of orientation images.

    No mean is removed unless ``center=True``.
    """
    images = check_orientation_stack(images)
    if not images:
        raise DimensionError("need at least one image")
    Z = embedding_matrix(images)
    mean = None
    reference = 0.0
    if center:
        mean = Z.mean(axis=1)
        Z = Z - mean[:, np.newaxis]
        reference = float(Z.shape[0])  # every uncentered column has squared norm p
    subspace = snapshot_pca(Z, k, serial=serial, reference=reference)
    h, w = images[0].shape
    return IgoModel(subspace, filter_spec or GradientFilterSpec(), h, w, mean)


def _check_query(model, phi):
    if phi.shape != model.shape:
        raise DimensionError(f"image shape {phi.shape} does not match model shape {model.shape}")


def project(model, Z):
    """``B B^H Z`` (plus the mean when the model is centered); Z is (p, n)."""
    B = model.basis
    if model.mean is None:
        return B @ (B.conj().T @ Z)
    m = model.mean[:, np.newaxis]
    return m + B @ (B.conj().T @ (Z - m))


def reconstruct(model, phi, modulus_floor=DEFAULT_MODULUS_FLOOR, return_projection=False):
    """Embed a new orientation image and map its projection back to angles.

    Pixels where the projection has modulus ``<= modulus_floor`` carry no
    usable angle and are marked invalid.
    """
    _check_query(model, phi)
    z_tilde = project(model, embed(phi)[:, np.newaxis])[:, 0]
    out = unembed(z_tilde, model.shape, modulus_floor)
    if return_projection:
        return out, z_tilde
    return out


def batch_reconstruct(model, images, modulus_floor=DEFAULT_MODULUS_FLOOR):
    images = list(images)
    if not images:
        return []
    for phi in images:
        _check_query(model, phi)
    # per-column products keep results bit-identical to reconstruct()
    return [reconstruct(model, phi, modulus_floor) for phi in images]


def outlier_alignments(model, images):
    """``|b_l^H z_i| / sqrt(p)`` for every component l and image i, shape (k, n)."""
    Z = embedding_matrix(images)
    return np.abs(model.basis.conj().T @ Z) / np.sqrt(model.p)


def remark3_outlier_axis(model, images, i, threshold=OUTLIER_ALIGNMENT_THRESHOLD):
    """Find the component best aligned (up to phase) with image ``i``.

    Returns ``(found, component, alignment)`` where alignment is
    ``|b_l^H z_i| / sqrt(p)`` in [0, 1] and ``found`` means it exceeds
    ``threshold``.
    """
    images = check_orientation_stack(images, model.shape)
    if not 0 <= i < len(images):
        raise IndexError(f"image index {i} out of range for {len(images)} images")
    z = embed(images[i])
    align = np.abs(model.basis.conj().T @ z) / np.sqrt(model.p)
    l = int(np.argmax(align))
    a = float(min(align[l], 1.0))
    return a > threshold, l, a


def drop_components(model, components):
    """Copy of ``model`` without the listed component indices."""
    keep = [l for l in range(model.k) if l not in set(components)]
    if not keep:
        raise RankError("cannot drop every component")
    sub = model.subspace
    reduced = PrincipalSubspace(sub.basis[:, keep], sub.eigenvalues[keep], sub.spectrum, sub.rank)
    return IgoModel(reduced, model.filter, model.height, model.width, model.mean)


def truncate(model, k):
    """Copy of ``model`` keeping only the leading ``k`` components."""
    return drop_components(model, range(k, model.k))


class IGOPCA(TransformerMixin, BaseEstimator):
    """Principal component analysis of image gradient orientations.

    Parameters
    ----------
    n_components : int
        Number of principal components; must not exceed the numerical rank of
        the Gram matrix of the embedded training set.
    center : bool, default False
        Subtract the mean embedding before the eigen-analysis.
    modulus_floor : float, default 1e-6
        Reconstructed pixels with ``|z~| <= modulus_floor`` are marked invalid.
    filter_spec : GradientFilterSpec, optional
        Recorded with the model; describes how the orientations were made.
    serial : bool, default False
        Use the serial, bit-reproducible Gram product.

    Attributes
    ----------
    model_ : IgoModel
    components_ : ndarray of shape (n_components, p)
        Row l is the basis vector ``b_l``.
    explained_variance_ : ndarray of shape (n_components,)
    spectrum_ : ndarray of shape (n_samples,)
        Every eigenvalue of ``Z^H Z``, descending.

    Examples
    --------
    >>> from sklearn.pipeline import make_pipeline
    >>> from igopca import GradientOrientations, IGOPCA
    >>> pipe = make_pipeline(GradientOrientations(), IGOPCA(n_components=5))
    """

    def __init__(self, n_components=5, center=False, modulus_floor=DEFAULT_MODULUS_FLOOR,
                 filter_spec=None, serial=False):
        self.n_components = n_components
        self.center = center
        self.modulus_floor = modulus_floor
        self.filter_spec = filter_spec
        self.serial = serial

    def fit(self, X, y=None):
        self.model_ = fit(X, self.n_components, self.filter_spec, self.center, self.serial)
        return self

    @property
    def components_(self):
        check_is_fitted(self)
        return self.model_.basis.T

    @property
    def explained_variance_(self):
        check_is_fitted(self)
        return self.model_.subspace.eigenvalues

    @property
    def spectrum_(self):
        check_is_fitted(self)
        return self.model_.subspace.spectrum

    def transform(self, X):
        """Complex coefficients ``B^H z`` for each image, shape (n, k)."""
        check_is_fitted(self)
        images = check_orientation_stack(X, self.model_.shape)
        Z = embedding_matrix(images)
        if self.model_.mean is not None:
            Z = Z - self.model_.mean[:, np.newaxis]
        return (self.model_.basis.conj().T @ Z).T

    def inverse_transform(self, C):
        """Orientation images from coefficients produced by :meth:`transform`."""
        check_is_fitted(self)
        C = np.atleast_2d(np.asarray(C, dtype=np.complex128))
        Zt = self.model_.basis @ C.T
        if self.model_.mean is not None:
            Zt = Zt + self.model_.mean[:, np.newaxis]
        return [unembed(Zt[:, i], self.model_.shape, self.modulus_floor) for i in range(Zt.shape[1])]

    def reconstruct(self, X):
        check_is_fitted(self)
        images = check_orientation_stack(X, self.model_.shape)
        return batch_reconstruct(self.model_, images, self.modulus_floor)

"""Input validation helpers shared by the estimators."""

import numpy as np

from .errors import DimensionError, NotFittedError
from .orientation import OrientationImage, check_gray_image


def check_orientation_stack(X, shape=None):
    """Coerce ``X`` to a list of :class:`OrientationImage` of one shape.

    ``X`` may be a sequence of OrientationImage objects or an angle array of
    shape (n, m1, m2); plain arrays are taken as fully valid.
    """
    if isinstance(X, OrientationImage):
        X = [X]
    elif isinstance(X, np.ndarray):
        if X.ndim == 2:
            X = X[np.newaxis]
        if X.ndim != 3:
            raise DimensionError(f"angle stack must be (n, m1, m2), got {X.shape}")
        X = [OrientationImage.from_angles(a) for a in X]
    else:
        X = [x if isinstance(x, OrientationImage) else OrientationImage.from_angles(x) for x in X]
    if shape is None and X:
        shape = X[0].shape
    for i, x in enumerate(X):
        if x.shape != tuple(shape):
            raise DimensionError(f"image {i} has shape {x.shape}, expected {tuple(shape)}")
    return X


def check_gray_stack(X, shape=None):
    """Coerce ``X`` to a float array (n, m1, m2) of valid gray images."""
    imgs = [check_gray_image(x) for x in X]
    if not imgs:
        return np.empty((0,) + (tuple(shape) if shape else (0, 0)))
    if shape is None:
        shape = imgs[0].shape
    for i, x in enumerate(imgs):
        if x.shape != tuple(shape):
            raise DimensionError(f"image {i} has shape {x.shape}, expected {tuple(shape)}")
    return np.stack(imgs)


def check_is_fitted(estimator, attr="model_"):
    if getattr(estimator, attr, None) is None:
        raise NotFittedError(f"{type(estimator).__name__} is not fitted yet; call fit first")

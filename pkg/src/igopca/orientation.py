"""Gradient orientations, the cosine kernel and the complex-sphere embedding."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DimensionError, DomainError

TWO_PI = 2.0 * np.pi
DEFAULT_MAGNITUDE_FLOOR = 1e-8


def wrap_angle(x):
    """Map angles into [0, 2*pi).  Results that round to 2*pi become 0."""
    x = np.asarray(x, dtype=np.float64)
    w = x - TWO_PI * np.floor(x / TWO_PI)
    w = np.where(w < 0.0, w + TWO_PI, w)  # x / 2pi can underflow for tiny negative x
    return np.where(w >= TWO_PI, 0.0, w)


def check_gray_image(img, min_size=3):
    """Validate a 2-D finite intensity array and return it as float64."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise DimensionError(f"gray image must be 2-D, got shape {img.shape}")
    if min(img.shape) < min_size:
        raise DimensionError(f"image {img.shape} is smaller than the {min_size}x{min_size} filter support")
    if not np.all(np.isfinite(img)):
        raise DomainError("image intensities must be finite")
    return img


@dataclass(frozen=True)
class GradientFilterSpec:
    kind: str = "central-difference"
    sigma: float = 1.0
    boundary: str = "replicate"

    def __post_init__(self):
        if self.kind not in ("central-difference", "gaussian-derivative"):
            raise ValueError(f"unknown gradient filter {self.kind!r}")
        if self.kind == "gaussian-derivative" and not self.sigma > 0:
            raise ValueError("gaussian-derivative needs sigma > 0")
        if self.boundary != "replicate":
            raise ValueError("only replicate boundary handling is supported")

    @property
    def half_width(self):
        if self.kind == "central-difference":
            return 1
        return int(math.ceil(3.0 * self.sigma))

    def kernels(self):
        """Return ``(derivative, smoothing)`` 1-D correlation kernels.

        The derivative kernel responds with +1 to a unit ramp; the smoothing
        kernel sums to one, so the separable 2-D kernel sums to zero.
        """
        if self.kind == "central-difference":
            return np.array([-0.5, 0.0, 0.5]), np.array([1.0])
        hw = self.half_width
        t = np.arange(-hw, hw + 1, dtype=np.float64)
        g = np.exp(-0.5 * (t / self.sigma) ** 2)
        smooth = g / g.sum()
        deriv = t / self.sigma**2 * g
        deriv -= deriv.mean()
        deriv /= np.dot(t, deriv)
        return deriv, smooth

    def to_dict(self):
        return {"kind": self.kind, "sigma": float(self.sigma), "boundary": self.boundary}

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], sigma=float(d.get("sigma", 1.0)), boundary=d.get("boundary", "replicate"))


@dataclass(frozen=True, eq=False)
class OrientationImage:
    """Per-pixel gradient angles in [0, 2*pi) plus a validity mask.

    Invalid pixels (undefined orientation) carry angle 0.
    """

    angles: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64)
        mask = np.asarray(self.valid_mask, dtype=bool)
        if angles.ndim != 2:
            raise DimensionError(f"orientation image must be 2-D, got shape {angles.shape}")
        if mask.shape != angles.shape:
            raise DimensionError(f"mask shape {mask.shape} != angle shape {angles.shape}")
        if angles.size and not (np.all(angles >= 0.0) and np.all(angles < TWO_PI)):
            raise DomainError("angles must lie in [0, 2*pi)")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "valid_mask", mask)

    @classmethod
    def from_angles(cls, angles, valid_mask=None):
        """Wrap arbitrary angles; all pixels valid unless a mask is given."""
        angles = wrap_angle(angles)
        if angles.ndim == 1:
            angles = angles[np.newaxis, :]
        if valid_mask is None:
            valid_mask = np.ones(angles.shape, dtype=bool)
        return cls(angles, np.asarray(valid_mask, dtype=bool).reshape(angles.shape))

    @property
    def shape(self):
        return self.angles.shape

    @property
    def height(self):
        return self.angles.shape[0]

    @property
    def width(self):
        return self.angles.shape[1]

    @property
    def size(self):
        return self.angles.size

    def vector(self):
        """Angles in lexicographic (row-major) order."""
        return self.angles.ravel()


def image_gradients(img, filter_spec=None):
    """``(G_x, G_y)`` with replicate padding; x runs along columns, y along rows."""
    spec = filter_spec or GradientFilterSpec()
    img = check_gray_image(img, min_size=max(3, 2 * spec.half_width + 1))
    deriv, smooth = spec.kernels()
    gx = correlate1d(img, deriv, axis=1, mode="nearest")
    gy = correlate1d(img, deriv, axis=0, mode="nearest")
    if smooth.size > 1:
        gx = correlate1d(gx, smooth, axis=0, mode="nearest")
        gy = correlate1d(gy, smooth, axis=1, mode="nearest")
    return gx, gy


def compute_orientation(img, filter_spec=None, magnitude_floor=DEFAULT_MAGNITUDE_FLOOR):
    """Gradient orientation image of a grayscale image.

    The angle is the four-quadrant angle of ``(G_x, G_y)`` shifted into
    [0, 2*pi).  Pixels whose gradient magnitude does not exceed
    ``magnitude_floor`` are marked invalid and get angle 0.
    """
    if magnitude_floor < 0:
        raise DomainError("magnitude_floor must be non-negative")
    gx, gy = image_gradients(img, filter_spec)
    valid = np.hypot(gx, gy) > magnitude_floor
    angles = np.where(valid, wrap_angle(np.arctan2(gy, gx)), 0.0)
    return OrientationImage(angles, valid)


def _check_pair(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"orientation images differ in shape: {a.shape} vs {b.shape}")


def orientation_difference(a, b):
    _check_pair(a, b)
    return OrientationImage(wrap_angle(a.angles - b.angles), a.valid_mask & b.valid_mask)


def cosine_kernel(a, b, region=None):
    """Sum of ``cos(phi_a - phi_b)`` over ``region`` (default: every pixel).

    Angles are used as stored, so two pixels that are both flat (angle 0)
    contribute +1.  Intersect ``region`` with the masks to drop them.
    """
    _check_pair(a, b)
    c = np.cos(a.angles - b.angles)
    if region is None:
        return float(c.sum())
    region = np.asarray(region, dtype=bool)
    if region.shape != a.shape:
        raise DimensionError(f"region shape {region.shape} != image shape {a.shape}")
    return float(c[region].sum())


def cosine_distance(a, b):
    """Squared cosine distance ``sum(1 - cos(dphi))``; lies in [0, 2p]."""
    _check_pair(a, b)
    return float(np.sum(1.0 - np.cos(a.angles - b.angles)))


def embed(phi):
    """``exp(j*phi)`` of the vectorised orientation image (length p)."""
    v = phi.vector()
    return np.cos(v) + 1j * np.sin(v)


def unembed(z, shape=None, modulus_floor=0.0):
    """Back to the orientation domain by taking per-entry angles.

    Entries with modulus ``<= modulus_floor`` (zeros by default) get angle 0
    and are marked invalid.
    """
    z = np.asarray(z, dtype=np.complex128).ravel()
    if z.size == 0:
        raise DimensionError("cannot unembed an empty vector")
    if shape is None:
        shape = (1, z.size)
    if int(np.prod(shape)) != z.size:
        raise DimensionError(f"shape {shape} does not hold {z.size} entries")
    valid = np.abs(z) > modulus_floor
    angles = np.where(valid, wrap_angle(np.angle(z)), 0.0)
    return OrientationImage(angles.reshape(shape), valid.reshape(shape))


def chord(za, zb):
    za = np.asarray(za)
    zb = np.asarray(zb)
    if za.shape != zb.shape:
        raise DimensionError(f"embeddings differ in length: {za.shape} vs {zb.shape}")
    d = za - zb
    return float(np.sqrt(np.vdot(d, d).real))


class GradientOrientations(TransformerMixin, BaseEstimator):
    """Turn a stack of grayscale images into :class:`OrientationImage` objects.

    Stateless; ``fit`` only validates input.  Meant to sit in front of
    :class:`igopca.IGOPCA` in a pipeline.
    """

    def __init__(self, kind="central-difference", sigma=1.0, magnitude_floor=DEFAULT_MAGNITUDE_FLOOR):
        self.kind = kind
        self.sigma = sigma
        self.magnitude_floor = magnitude_floor

    @property
    def filter_spec(self):
        return GradientFilterSpec(kind=self.kind, sigma=self.sigma)

    def fit(self, X, y=None):
        self.filter_spec  # validates kind/sigma
        return self

    def transform(self, X):
        spec = self.filter_spec
        return [compute_orientation(img, spec, self.magnitude_floor) for img in X]

"""Uniformity testing of orientation differences and eigen-spectrum checks."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SampleSizeError
from .orientation import TWO_PI, OrientationImage, _check_pair, orientation_difference
from .rng import SplitMix64

MIN_KS_SAMPLES = 8


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int
    accepted: bool


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    normalized: np.ndarray
    flatness: float


def kolmogorov_sf(t, term_tol=1e-12, max_terms=1_000_000):
    """Survival function of the Kolmogorov distribution.

    ``Q(t) = 2 * sum_{j>=1} (-1)**(j-1) * exp(-2 j^2 t^2)``, summed until a
    term drops below ``term_tol``.
    """
    if t <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, max_terms + 1):
        term = math.exp(-2.0 * j * j * t * t)
        total += sign * term
        if term < term_tol:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_statistic(u):
    """One-sample KS distance between the sample ``u`` (in [0, 1]) and U[0, 1]."""
    u = np.sort(np.asarray(u, dtype=np.float64))
    n = u.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def ks_uniform_test(samples, alpha=0.01):
    """KS test of ``H0: samples ~ U[0, 2*pi)``.

    The p-value uses the asymptotic Kolmogorov law at
    ``(sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D``.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < MIN_KS_SAMPLES:
        raise SampleSizeError(f"KS test needs at least {MIN_KS_SAMPLES} samples, got {n}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not (np.all(x >= 0.0) and np.all(x < TWO_PI)):
        raise DomainError("samples must lie in [0, 2*pi)")
    d = ks_statistic(x / TWO_PI)
    sqn = math.sqrt(n)
    p = kolmogorov_sf((sqn + 0.12 + 0.11 / sqn) * d)
    return KsResult(d, p, n, p > alpha)


def dissimilarity_test(a, b, alpha=0.01):
    """Test whether two images are pixel-wise dissimilar.

    Runs :func:`ks_uniform_test` on the orientation differences over the
    pixels valid in both images.
    """
    _check_pair(a, b)
    diff = orientation_difference(a, b)
    return ks_uniform_test(diff.angles[diff.valid_mask], alpha)


def spectrum_flatness(eigenvalues, p):
    w = np.asarray(eigenvalues, dtype=np.float64)
    if np.any(w < -1e-10):
        raise DomainError("eigenvalues must be non-negative")
    if np.any(np.diff(w) > 0):
        raise DomainError("eigenvalues must be sorted in descending order")
    normalized = w / float(p)
    flatness = float(np.max(np.abs(normalized - 1.0))) if w.size else 0.0
    return SpectrumReport(normalized, flatness)


def random_orientation_image(height, width, seed):
    """I.i.d. U[0, 2*pi) angles from a seeded SplitMix64 stream, all valid."""
    if height < 1 or width < 1:
        raise DomainError("image dimensions must be positive")
    rng = SplitMix64(seed)
    angles = rng.random((height, width)) * TWO_PI
    angles[angles >= TWO_PI] = 0.0
    return OrientationImage(angles, np.ones((height, width), dtype=bool))

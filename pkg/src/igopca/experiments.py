"""Experiment drivers shared by the command line and the acceptance suite."""

from dataclasses import dataclass, field

import numpy as np

from . import igo
from .baseline import l2_fit, l2_project
from .errors import MissingGroundTruthError, SampleSizeError
from .linalg import gram, hermitian_eig, numerical_rank
from .orientation import GradientFilterSpec, compute_orientation
from .rng import derive_seed
from .stats import dissimilarity_test, random_orientation_image, spectrum_flatness


def region_error(rec, truth, region=None):
    """Mean of ``1 - cos(dphi)`` over ``region`` and the pixels valid in ``truth``.

    This is ``d^2 / N(region)``; it lies in [0, 2].  Returns NaN for an empty
    region.
    """
    mask = truth.valid_mask.copy()
    if region is not None:
        mask &= region
    if not mask.any():
        return float("nan")
    return float(np.mean(1.0 - np.cos(rec.angles[mask] - truth.angles[mask])))


@dataclass
class CompareRow:
    index: int
    mode: str
    clean_pixels: int
    igo_error: float
    l2_error: float
    l2_rmse: float
    alignment: float = float("nan")
    component: int = -1


@dataclass
class CompareReport:
    rows: list
    k: int
    igo_flatness: float
    igo_spectrum: np.ndarray
    l2_spectrum: np.ndarray
    extra: dict = field(default_factory=dict)

    def _mean(self, attr):
        vals = [getattr(r, attr) for r in self.rows if r.clean_pixels > 0]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def igo_mean_error(self):
        return self._mean("igo_error")

    @property
    def l2_mean_error(self):
        return self._mean("l2_error")

    @property
    def l2_mean_rmse(self):
        return self._mean("l2_rmse")

    @property
    def outlier_alignments(self):
        return [r.alignment for r in self.rows if r.mode == "replacement"]


def compare(observed, clean, corruptions, k, filter_spec=None, magnitude_floor=1e-8, serial=False):
    """Fit IGO-PCA and l2 PCA on ``observed`` and score both on clean regions.

    l2 reconstructions are turned into orientation images with the same
    gradient filter, so both methods share one metric.  ``clean`` holds the
    uncorrupted ground truth, ``corruptions`` the per-image records.
    """
    if clean is None or len(clean) != len(observed):
        raise MissingGroundTruthError("compare needs a clean ground-truth copy of every image")
    spec = filter_spec or GradientFilterSpec()
    observed = np.asarray(observed, dtype=np.float64)
    clean = np.asarray(clean, dtype=np.float64)
    n = observed.shape[0]
    shape = observed.shape[1:]
    phis = [compute_orientation(x, spec, magnitude_floor) for x in observed]
    truths = [compute_orientation(x, spec, magnitude_floor) for x in clean]

    model = igo.fit(phis, k, spec, serial=serial)
    recs = igo.batch_reconstruct(model, phis)
    l2 = l2_fit(observed, k, serial=serial)
    l2_recs = l2_project(l2, observed.reshape(n, -1).T).T.reshape(observed.shape)

    rows = []
    for i in range(n):
        corr = corruptions[i]
        region = corr.clean_region(shape)
        l2_phi = compute_orientation(l2_recs[i], spec, magnitude_floor)
        npix = int(np.count_nonzero(region & truths[i].valid_mask))
        rmse = float(np.sqrt(np.mean((l2_recs[i][region] - clean[i][region]) ** 2))) if region.any() else float("nan")
        row = CompareRow(i, corr.mode, npix, region_error(recs[i], truths[i], region),
                         region_error(l2_phi, truths[i], region), rmse)
        if corr.mode == "replacement":
            _, row.component, row.alignment = igo.remark3_outlier_axis(model, phis, i)
        rows.append(row)
    flat = spectrum_flatness(model.subspace.spectrum, model.p).flatness
    return CompareReport(rows, k, flat, model.subspace.spectrum, l2.spectrum)


@dataclass
class OutlierAxisResult:
    rank: int
    component: int
    alignment: float
    truncation: int
    inlier_error_with: float
    inlier_error_without: float

    @property
    def relative_change(self):
        base = self.inlier_error_with
        return abs(self.inlier_error_without - base) / base if base > 0 else float("inf")


def outlier_axis_experiment(observed, corruptions, filter_spec=None, magnitude_floor=1e-8, k_report=5):
    """Locate the eigenvector carrying a replicated outlier image.

    The model keeps every component the data support (k = numerical rank;
    duplicated outliers make the Gram matrix rank deficient).  The effect of
    the outlier axis on inliers is measured on the leading
    ``max(k_report, l + 1)`` components, with and without component ``l``.
    """
    spec = filter_spec or GradientFilterSpec()
    phis = [compute_orientation(x, spec, magnitude_floor) for x in observed]
    Z = igo.embedding_matrix(phis)
    rank = numerical_rank(hermitian_eig(gram(Z)).eigenvalues)
    model = igo.fit(phis, rank, spec)
    outliers = [i for i, c in enumerate(corruptions) if c.mode == "replacement"]
    inliers = [i for i, c in enumerate(corruptions) if c.mode == "none"]
    _, comp, align = igo.remark3_outlier_axis(model, phis, outliers[0])

    trunc = min(model.k, max(k_report, comp + 1))
    with_axis = igo.truncate(model, trunc)
    without_axis = igo.drop_components(with_axis, [comp])
    err_with = np.mean([region_error(igo.reconstruct(with_axis, phis[i]), phis[i]) for i in inliers])
    err_without = np.mean([region_error(igo.reconstruct(without_axis, phis[i]), phis[i]) for i in inliers])
    return OutlierAxisResult(rank, comp, align, trunc, float(err_with), float(err_without))


@dataclass
class KsTrial:
    seed: int
    n: int
    statistic: float
    p_value: float
    accepted: bool


def synthetic_ks_trials(trials, height, width, seed, alpha=0.01):
    """Dissimilarity tests on pairs of seeded uniform-random orientation images."""
    out = []
    for t in range(trials):
        s = derive_seed(seed, t)
        a = random_orientation_image(height, width, derive_seed(s, 0))
        b = random_orientation_image(height, width, derive_seed(s, 1))
        r = dissimilarity_test(a, b, alpha)
        out.append(KsTrial(s, r.n, r.statistic, r.p_value, r.accepted))
    return out


def image_pair_ks_trials(images, alpha=0.01, trials=None, filter_spec=None, magnitude_floor=1e-8):
    """Dissimilarity tests over all unordered pairs of gray images, in order."""
    if len(images) < 2:
        raise SampleSizeError("need at least two images to form a pair")
    phis = [compute_orientation(x, filter_spec, magnitude_floor) for x in images]
    out = []
    for i in range(len(phis)):
        for j in range(i + 1, len(phis)):
            if trials is not None and len(out) >= trials:
                return out
            r = dissimilarity_test(phis[i], phis[j], alpha)
            out.append(KsTrial(i * len(phis) + j, r.n, r.statistic, r.p_value, r.accepted))
    return out


def spectrum_report(phis, serial=False):
    """Full eigen-spectrum of ``Z^H Z`` normalised by the pixel count."""
    Z = igo.embedding_matrix(phis)
    w = hermitian_eig(gram(Z, serial=serial)).eigenvalues
    return spectrum_flatness(np.maximum(w, 0.0), Z.shape[0])

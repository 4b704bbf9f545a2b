import math

import numpy as np
import pytest

from igopca import igo
from igopca.errors import DimensionError, RankError
from igopca.orientation import OrientationImage, compute_orientation, cosine_distance, embed
from igopca.stats import random_orientation_image

from conftest import random_phi


def circ_max(a, b, mask=None):
    d = np.abs(np.angle(np.exp(1j * (a.angles - b.angles))))
    return d[mask].max() if mask is not None else d.max()


def smooth_phi(h=32, w=32):
    yy, xx = np.mgrid[0:h, 0:w]
    return compute_orientation(np.cos(xx / 7.0) + np.sin(yy / 5.0))


def rand_stack(n, shape, base=0):
    return [random_orientation_image(*shape, base + i) for i in range(n)]


class TestFit:
    def test_rank_one(self, rng):
        phi = random_phi(rng, (6, 5))
        model = igo.fit([phi], 1)
        assert model.subspace.eigenvalues[0] == pytest.approx(30.0)
        b = model.basis[:, 0]
        z = embed(phi) / math.sqrt(30)
        phase = np.vdot(z, b)
        np.testing.assert_allclose(b, phase * z, atol=1e-12)

    def test_full_rank_reconstructs_training(self, rng):
        images = [random_phi(rng, (12, 12)) for _ in range(5)]
        model = igo.fit(images, 5)
        for phi in images:
            rec = igo.reconstruct(model, phi)
            assert circ_max(rec, phi, phi.valid_mask) <= 1e-8

    def test_dissimilar_images_eigenvalues_near_p(self):
        images = rand_stack(10, (100, 100))
        model = igo.fit(images, 10)
        np.testing.assert_allclose(model.subspace.eigenvalues / 10_000, 1.0, atol=0.1)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            igo.fit([random_phi(rng, (4, 4)), random_phi(rng, (4, 5))], 1)

    def test_rank_error(self, rng):
        phi = random_phi(rng, (4, 4))
        with pytest.raises(RankError):
            igo.fit([phi, phi], 2)

    def test_accepts_angle_array(self, rng):
        angles = rng.uniform(0, 2 * np.pi, (3, 5, 5))
        model = igo.fit(angles, 2)
        assert model.shape == (5, 5) and model.k == 2

    def test_orthonormal_basis(self):
        model = igo.fit(rand_stack(6, (20, 20)), 4)
        B = model.basis
        assert np.abs(B.conj().T @ B - np.eye(4)).max() <= 1e-9

    def test_energy_ordering(self):
        images = rand_stack(6, (16, 16), base=40)
        Z = igo.embedding_matrix(images)
        full = igo.fit(images, 6)
        energies = []
        for k in range(1, 7):
            B = igo.truncate(full, k).basis
            energies.append(np.sum(np.abs(B.conj().T @ Z) ** 2))
            assert energies[-1] == pytest.approx(full.subspace.eigenvalues[:k].sum(), rel=1e-8)
        assert np.all(np.diff(energies) >= -1e-9)

    def test_permutation_invariant_projector(self):
        images = [smooth_phi()] + rand_stack(4, (32, 32))
        m1 = igo.fit(images, 3)
        m2 = igo.fit(images[::-1], 3)
        P1 = m1.basis @ m1.basis.conj().T
        P2 = m2.basis @ m2.basis.conj().T
        assert np.abs(P1 - P2).max() <= 1e-8

    def test_centered_option(self, rng):
        images = [random_phi(rng, (8, 8)) for _ in range(4)]
        model = igo.fit(images, 3, center=True)
        assert model.mean is not None
        for phi in images:
            assert circ_max(igo.reconstruct(model, phi), phi) <= 1e-8


class TestReconstruct:
    def test_own_span(self, rng):
        phi = random_phi(rng, (9, 9))
        model = igo.fit([phi], 1)
        assert circ_max(igo.reconstruct(model, phi), phi) <= 1e-10

    def test_orthogonal_query_is_invalid(self, rng):
        phi = random_phi(rng, (4, 4))
        model = igo.fit([phi], 1)
        flip = np.where(np.arange(16).reshape(4, 4) % 2 == 0, 0.0, np.pi)
        query = OrientationImage.from_angles(phi.angles + flip)
        rec, z_tilde = igo.reconstruct(model, query, return_projection=True)
        assert np.abs(z_tilde).max() < 1e-12
        assert not rec.valid_mask.any()

    def test_matches_batch_step_four(self, rng):
        images = [random_phi(rng, (10, 10)) for _ in range(4)]
        model = igo.fit(images, 4)
        Z = igo.embedding_matrix(images)
        Zt = model.basis @ (model.basis.conj().T @ Z)
        for i, phi in enumerate(images):
            rec = igo.reconstruct(model, phi)
            oracle = np.mod(np.angle(Zt[:, i]), 2 * np.pi).reshape(phi.shape)
            assert np.abs(np.angle(np.exp(1j * (rec.angles - oracle)))).max() <= 1e-8
            assert circ_max(rec, phi) <= 1e-8

    def test_dimension_mismatch(self, rng):
        model = igo.fit([random_phi(rng, (4, 4))], 1)
        with pytest.raises(DimensionError):
            igo.reconstruct(model, random_phi(rng, (5, 4)))

    def test_idempotent_rank_one(self, rng):
        model = igo.fit([random_phi(rng, (10, 10))], 1)
        query = random_phi(rng, (10, 10))
        once, z1 = igo.reconstruct(model, query, return_projection=True)
        assert np.abs(z1).min() > 1e-6
        twice = igo.reconstruct(model, once)
        assert cosine_distance(once, twice) <= 1e-6 * query.size

    def test_random_query_error_near_one(self):
        model = igo.fit([smooth_phi()], 1)
        errs = []
        for s in range(20):
            q = random_orientation_image(32, 32, 1000 + s)
            errs.append(cosine_distance(igo.reconstruct(model, q), q) / q.size)
        assert np.mean(errs) == pytest.approx(1.0, abs=0.1)


class TestBatch:
    def test_single_is_bitwise_equal(self, rng):
        images = [random_phi(rng, (7, 7)) for _ in range(3)]
        model = igo.fit(images, 2)
        (batch,) = igo.batch_reconstruct(model, images[:1])
        single = igo.reconstruct(model, images[0])
        assert batch.angles.tobytes() == single.angles.tobytes()
        assert np.array_equal(batch.valid_mask, single.valid_mask)

    def test_empty(self, rng):
        model = igo.fit([random_phi(rng, (3, 3))], 1)
        assert igo.batch_reconstruct(model, []) == []

    def test_three_training_images(self, rng):
        images = [random_phi(rng, (8, 8)) for _ in range(3)]
        model = igo.fit(images, 3)
        for rec, phi in zip(igo.batch_reconstruct(model, images), images):
            assert circ_max(rec, igo.reconstruct(model, phi)) == 0.0
            assert circ_max(rec, phi) <= 1e-8


class TestOutlierAxis:
    def test_single_image_alignment_is_one(self, rng):
        phi = random_phi(rng, (6, 6))
        found, comp, align = igo.remark3_outlier_axis(igo.fit([phi], 1), [phi], 0)
        assert found and comp == 0
        assert align == pytest.approx(1.0, abs=1e-12)

    def test_index_out_of_range(self, rng):
        phi = random_phi(rng, (3, 3))
        with pytest.raises(IndexError):
            igo.remark3_outlier_axis(igo.fit([phi], 1), [phi], 1)

    def test_replicated_outlier_gets_own_axis(self):
        inlier = smooth_phi()
        rho = random_orientation_image(32, 32, 7)
        images = [inlier, rho, rho, rho]
        model = igo.fit(images, 2)
        found, comp, align = igo.remark3_outlier_axis(model, images, 1)
        assert found and align >= 0.95

    @pytest.mark.xfail(strict=True, reason="equal-norm dissimilar pair gives a degenerate spectrum; eigenvectors mix")
    def test_pair_alignment_literal(self):
        images = [smooth_phi(), random_orientation_image(32, 32, 3)]
        found, _, align = igo.remark3_outlier_axis(igo.fit(images, 2), images, 1)
        assert found and align >= 0.95

    @pytest.mark.xfail(strict=True, reason="near-identity Gram matrix: per-vector axes are arbitrary mixtures")
    def test_all_random_distinct_axes_literal(self):
        images = rand_stack(10, (100, 100))
        model = igo.fit(images, 10)
        align = igo.outlier_alignments(model, images)
        assert np.all(align.max(axis=0) >= 0.9)
        assert len(set(align.argmax(axis=0))) == 10

    def test_dissimilar_images_lie_in_subspace(self):
        for images in ([smooth_phi(), random_orientation_image(32, 32, 3)], rand_stack(10, (100, 100))):
            model = igo.fit(images, len(images))
            Z = igo.embedding_matrix(images)
            captured = np.linalg.norm(model.basis.conj().T @ Z, axis=0) / math.sqrt(model.p)
            assert captured.min() >= 0.95

    def test_shared_region_dominates_inner_product(self):
        rng = np.random.default_rng(5)
        h, w = 60, 60
        base = rng.uniform(0, 2 * np.pi, (h, w))
        region2 = np.zeros((h, w), bool)
        region2[10:40, 15:45] = True
        for trial in range(20):
            other = base.copy()
            other[region2] = rng.uniform(0, 2 * np.pi, region2.sum())
            zi = embed(OrientationImage.from_angles(base))
            zj = embed(OrientationImage.from_angles(other))
            n1, n2 = (~region2).sum(), region2.sum()
            assert abs(np.vdot(zi, zj).real - n1) <= 5 * math.sqrt(n2 / 2)

    def test_random_pair_inner_product_cancels(self):
        for s in range(20):
            a = random_orientation_image(50, 50, 2 * s)
            b = random_orientation_image(50, 50, 2 * s + 1)
            ip = np.vdot(embed(a), embed(b))
            bound = 5 * math.sqrt(a.size / 2)
            assert abs(ip.real) <= bound and abs(ip.imag) <= bound


def test_centered_identical_images_have_no_rank():
    phi = random_phi(np.random.default_rng(4))
    with pytest.raises(RankError):
        igo.fit([phi, phi, phi], 1, center=True)

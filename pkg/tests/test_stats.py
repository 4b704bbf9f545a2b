import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstwobign

from igopca.errors import DomainError, SampleSizeError
from igopca.orientation import OrientationImage, embed
from igopca.stats import (
    dissimilarity_test,
    kolmogorov_sf,
    ks_statistic,
    ks_uniform_test,
    random_orientation_image,
    spectrum_flatness,
)
from igopca import igo

TWO_PI = 2 * np.pi


def grid_sup(u, points=1_000_001):
    """sup |F_n(x) - x| over a dense grid; F_n evaluated right-continuously."""
    u = np.sort(u)
    x = np.linspace(0.0, 1.0, points)
    F = np.searchsorted(u, x, side="right") / u.size
    return float(np.max(np.abs(F - x)))


class TestKs:
    def test_stratified_grid(self):
        n = 200
        x = TWO_PI * (np.arange(1, n + 1) - 0.5) / n
        r = ks_uniform_test(x, 0.01)
        assert r.statistic == pytest.approx(1 / (2 * n))
        assert r.accepted

    def test_point_mass(self):
        r = ks_uniform_test(np.full(20, np.pi), 0.01)
        assert r.statistic >= 0.5
        assert not r.accepted

    @pytest.mark.parametrize("t", [0.05, 0.3, 0.7, 1.0, 1.36, 2.0, 3.0])
    def test_sf_matches_scipy(self, t):
        assert kolmogorov_sf(t) == pytest.approx(kstwobign.sf(t), abs=1e-10)

    def test_sf_limits(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(10.0) <= 1e-80

    def test_statistic_against_grid(self):
        rng = np.random.default_rng(9)
        for n in (8, 17, 60):
            u = rng.random(n)
            assert abs(ks_statistic(u) - grid_sup(u)) <= 1e-6 + 1e-12

    def test_errors(self):
        with pytest.raises(SampleSizeError):
            ks_uniform_test(np.ones(7), 0.01)
        with pytest.raises(DomainError):
            ks_uniform_test(np.full(10, TWO_PI), 0.01)
        with pytest.raises(DomainError):
            ks_uniform_test(np.full(10, -0.1), 0.01)
        with pytest.raises(DomainError):
            ks_uniform_test(np.ones(10), 1.5)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.0, TWO_PI, exclude_max=True), min_size=8, max_size=60), st.randoms())
    def test_permutation_invariant(self, xs, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        a, b = ks_uniform_test(xs), ks_uniform_test(ys)
        assert a.statistic == b.statistic and a.p_value == b.p_value

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.0, TWO_PI, exclude_max=True), min_size=8, max_size=60))
    def test_ranges(self, xs):
        r = ks_uniform_test(xs)
        assert 0.0 <= r.statistic <= 1.0 and 0.0 <= r.p_value <= 1.0

    @pytest.mark.slow
    def test_null_rejection_rate(self):
        from igopca.rng import SplitMix64

        rejected = 0
        for t in range(5000):
            x = SplitMix64(10_000 + t).random(1000) * TWO_PI
            rejected += not ks_uniform_test(x, 0.01).accepted
        assert 0.002 <= rejected / 5000 <= 0.03


class TestDissimilarity:
    def test_random_pair_accepted(self):
        acc = [dissimilarity_test(random_orientation_image(40, 40, 2 * s),
                                  random_orientation_image(40, 40, 2 * s + 1)).accepted for s in range(100)]
        assert np.mean(acc) >= 0.95

    def test_self_rejected(self):
        a = random_orientation_image(20, 20, 1)
        r = dissimilarity_test(a, a)
        assert r.statistic == pytest.approx(1.0) and not r.accepted

    def test_constant_offset_rejected(self):
        a = random_orientation_image(20, 20, 1)
        b = OrientationImage.from_angles(a.angles + 1.3)
        assert not dissimilarity_test(a, b).accepted

    def test_uses_jointly_valid_pixels(self):
        a = random_orientation_image(4, 4, 1)
        mask = np.zeros((4, 4), bool)
        mask[:2] = True
        b = OrientationImage(random_orientation_image(4, 4, 2).angles, mask)
        assert dissimilarity_test(a, b).n == 8
        mask[:] = False
        mask[0, :3] = True
        with pytest.raises(SampleSizeError):
            dissimilarity_test(a, OrientationImage(b.angles, mask))


class TestSpectrum:
    def test_flat(self):
        assert spectrum_flatness([5.0, 5.0], 5).flatness == 0.0

    def test_spike(self):
        assert spectrum_flatness([10.0, 0.0], 5).flatness == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            spectrum_flatness([1.0, -1.0], 2)
        with pytest.raises(DomainError):
            spectrum_flatness([1.0, 2.0], 2)

    @pytest.mark.slow
    def test_random_images_flat(self):
        images = [random_orientation_image(200, 200, s) for s in range(20)]
        model = igo.fit(images, 20)
        assert spectrum_flatness(model.subspace.eigenvalues, 40_000).flatness <= 0.1


class TestRandomImage:
    def test_deterministic(self):
        a = random_orientation_image(10, 12, 99)
        b = random_orientation_image(10, 12, 99)
        assert a.angles.tobytes() == b.angles.tobytes()
        assert a.valid_mask.all()

    def test_different_seeds_dissimilar(self):
        a = random_orientation_image(100, 100, 1)
        b = random_orientation_image(100, 100, 2)
        assert dissimilarity_test(a, b).accepted

    def test_mean_cosine_clt(self):
        for s in range(30):
            phi = random_orientation_image(50, 50, s)
            p = phi.size
            assert abs(np.cos(phi.angles).mean()) <= 5 / math.sqrt(2 * p)
            assert abs(np.sin(phi.angles).mean()) <= 5 / math.sqrt(2 * p)

    def test_bad_dims(self):
        with pytest.raises(DomainError):
            random_orientation_image(0, 3, 1)

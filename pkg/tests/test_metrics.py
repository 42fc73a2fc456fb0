import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from skimage.metrics import structural_similarity

from burstvst.errors import InvalidArgument
from burstvst.metrics import MetricReport, l1_gradient_loss, psnr, report, ssim

from conftest import raw


def sk_ssim(a, b, peak=1.0):
    return structural_similarity(a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
                                 data_range=peak, K1=0.01, K2=0.03)


class TestPsnr:
    def test_identical_capped(self, rng):
        a = rng.random((8, 8))
        assert psnr(a, a) == 99.0

    def test_gamma_one(self):
        a = np.zeros((10, 10))
        b = np.full((10, 10), 0.1)
        assert psnr(a, b, gamma=1.0) == pytest.approx(20.0)

    def test_gamma_hand_computed(self):
        a = np.array([[0.25, 0.5], [0.75, 1.0]])
        b = np.array([[0.2, 0.5], [0.8, 1.2]])
        g = 1 / 2.2
        errs = [(0.25**g - 0.2**g) ** 2, 0.0, (0.75**g - 0.8**g) ** 2, 0.0]  # 1.2 clamps to 1
        want = 10 * math.log10(1 / (sum(errs) / 4))
        assert psnr(a, b) == pytest.approx(want, rel=1e-12)

    def test_peak_normalization(self, rng):
        a, b = rng.random((8, 8)), rng.random((8, 8))
        assert psnr(a * 4000, b * 4000, peak=4000) == pytest.approx(psnr(a, b))

    def test_symmetric_and_monotone(self, smooth_texture):
        g = np.random.default_rng(3)
        n = g.standard_normal(smooth_texture.shape)
        vals = [psnr(np.clip(smooth_texture + s * n, 0, 1), smooth_texture) for s in (0.01, 0.02, 0.05, 0.1)]
        assert all(x > y for x, y in zip(vals, vals[1:]))
        b = np.clip(smooth_texture + 0.03 * n, 0, 1)
        assert psnr(b, smooth_texture) == psnr(smooth_texture, b)

    def test_errors(self):
        with pytest.raises(InvalidArgument):
            psnr(np.zeros((2, 2)), np.zeros((2, 3)))
        with pytest.raises(InvalidArgument):
            psnr(np.zeros((2, 2)), np.zeros((2, 2)), peak=0)

    def test_accepts_planes(self, rng):
        a = rng.random((4, 4))
        assert psnr(raw(a), raw(a)) == 99.0


class TestSsim:
    def test_identical(self, rng):
        a = rng.random((20, 20))
        assert ssim(a, a) == pytest.approx(1.0)

    def test_constants(self):
        v = ssim(np.zeros((16, 16)), np.ones((16, 16)))
        # closed form for constants: (c1) / (1 + c1) with c1 = 1e-4
        assert v == pytest.approx(1e-4 / (1 + 1e-4))
        assert v < 0.05

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_skimage(self, seed, smooth_texture):
        g = np.random.default_rng(seed)
        b = np.clip(smooth_texture + 0.05 * g.standard_normal(smooth_texture.shape), 0, 1)
        assert ssim(smooth_texture, b) == pytest.approx(sk_ssim(smooth_texture, b), abs=1e-6)
        assert ssim(smooth_texture[:40, :31], b[:40, :31]) == pytest.approx(
            sk_ssim(smooth_texture[:40, :31], b[:40, :31]), abs=1e-6)

    def test_monotone_and_symmetric(self, smooth_texture):
        g = np.random.default_rng(4)
        n = g.standard_normal(smooth_texture.shape)
        light, heavy = smooth_texture + 0.02 * n, smooth_texture + 0.2 * n
        s_light = ssim(smooth_texture, light)
        assert 1 > s_light > ssim(smooth_texture, heavy)
        assert s_light == pytest.approx(ssim(light, smooth_texture), abs=1e-12)

    def test_range(self, rng):
        a, b = rng.random((16, 16)), 1 - rng.random((16, 16))
        assert -1 <= ssim(a, 1 - a) <= 1 and -1 <= ssim(a, b) <= 1

    def test_too_small(self):
        with pytest.raises(InvalidArgument):
            ssim(np.zeros((10, 20)), np.zeros((10, 20)))


class TestLoss:
    def test_hand_example(self):
        c = np.array([[0.0, 1.0], [0.0, 1.0]])
        t = np.zeros((2, 2))
        # horizontal [-1, 1]: [[1], [1]] -> mean 1; vertical [-1, 1]^T: [[0, 0]] -> mean 0
        l1, g, comb = l1_gradient_loss(c, t, 0.5)
        assert abs(l1 - 0.5) <= 1e-7 and abs(g - 1.0) <= 1e-7 and abs(comb - 1.0) <= 1e-7

    def test_equal(self, rng):
        a = rng.random((9, 6))
        assert l1_gradient_loss(a, a) == (0.0, 0.0, 0.0)

    def test_constant_offset(self):
        l1, g, comb = l1_gradient_loss(np.full((5, 5), 0.7), np.full((5, 5), 0.4))
        assert (l1, g, comb) == (pytest.approx(0.3), 0.0, pytest.approx(0.3))

    @settings(max_examples=50)
    @given(arrays(np.float64, (4, 5), elements=st.floats(-1, 1)), arrays(np.float64, (4, 5), elements=st.floats(-1, 1)))
    def test_zero_iff_equal(self, a, b):
        comb = l1_gradient_loss(a, b)[2]
        assert (comb == 0) == np.array_equal(a, b)

    def test_mismatch(self):
        with pytest.raises(InvalidArgument):
            l1_gradient_loss(np.zeros((2, 2)), np.zeros((3, 2)))


def test_report(smooth_texture):
    b = np.clip(smooth_texture + 0.01, 0, 1)
    r = report(b, smooth_texture)
    assert isinstance(r, MetricReport)
    assert r.psnr_db == pytest.approx(psnr(b, smooth_texture))
    assert r.combined_loss == pytest.approx(r.l1 + 0.5 * r.grad_l1)
    assert set(r.as_dict()) == {"psnr_db", "ssim", "l1", "grad_l1", "combined_loss"}

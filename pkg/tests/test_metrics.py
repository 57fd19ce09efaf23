"""PSNR and SSIM."""

import numpy as np
import pytest

from hybridblur import compare_images, psnr, ssim
from hybridblur.metrics import PSNR_CAP, quantize_8bit


class TestPsnr:
    def test_identical_images_hit_cap(self, rng):
        img = rng.uniform(size=(24, 32, 3))
        assert psnr(img, img) == PSNR_CAP

    def test_black_vs_white_is_zero(self):
        black = np.zeros((16, 16, 3))
        white = np.ones((16, 16, 3))
        assert psnr(black, white) == 0.0

    def test_half_gray_vs_black_closed_form(self):
        gray = np.full((16, 16, 3), 0.5)
        black = np.zeros((16, 16, 3))
        # MSE = 0.25 -> 10*log10(4)
        assert abs(psnr(gray, black) - 6.0206) < 1e-3

    def test_symmetry(self, rng):
        a = rng.uniform(size=(20, 20, 3))
        b = rng.uniform(size=(20, 20, 3))
        assert psnr(a, b) == psnr(b, a)

    def test_monotone_in_noise_amplitude(self, rng):
        base = rng.uniform(0.3, 0.7, size=(32, 32, 3))
        noise = rng.normal(size=base.shape)
        noise /= np.abs(noise).max()
        values = [psnr(base, base + a * 0.2 * noise) for a in (0.1, 0.3, 0.6, 1.0)]
        assert all(x > y for x, y in zip(values, values[1:]))

    def test_quantize_flag(self):
        a = np.full((16, 16, 3), 100.0 / 255.0)
        b = np.zeros((16, 16, 3))
        assert psnr(a, b, quantize=True) == psnr(a, b)  # 8-bit representable
        gray = np.full((16, 16, 3), 0.5)
        assert psnr(gray, b, quantize=True) != psnr(gray, b)

    def test_resolution_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((8, 8, 3)), np.zeros((8, 9, 3)))


class TestSsim:
    def test_identical_images(self, rng):
        img = rng.uniform(size=(32, 32, 3))
        assert ssim(img, img) == 1.0

    def test_constant_images_closed_form(self):
        a = np.full((32, 32, 3), 0.5)
        b = np.full((32, 32, 3), 0.6)
        c1 = 0.01 ** 2
        mu1, mu2 = 0.5, 0.6
        want = (2.0 * mu1 * mu2 + c1) / (mu1 ** 2 + mu2 ** 2 + c1)
        assert abs(ssim(a, b) - want) < 1e-9

    def test_negative_image_scores_low_on_contrast_chart(self):
        ys, xs = np.meshgrid(np.arange(48), np.arange(48), indexing="ij")
        chart = np.zeros((48, 48, 3))
        chart[..., 0] = (xs // 6) % 2
        chart[..., 1] = (ys // 8) % 2
        chart[..., 2] = ((xs + ys) // 5) % 2
        chart = 0.15 + 0.7 * chart
        assert ssim(chart, 1.0 - chart) < 0.5

    def test_symmetry(self, rng):
        a = rng.uniform(size=(24, 24, 3))
        b = rng.uniform(size=(24, 24, 3))
        assert ssim(a, b) == ssim(b, a)

    def test_rgb_channel_mode(self, rng):
        a = rng.uniform(size=(24, 24, 3))
        b = np.clip(a + rng.normal(scale=0.05, size=a.shape), 0.0, 1.0)
        luma_score = ssim(a, b)
        rgb_score = ssim(a, b, channel="rgb")
        assert -1.0 <= rgb_score <= 1.0 and -1.0 <= luma_score <= 1.0
        assert rgb_score != luma_score

    def test_rejects_small_and_mismatched_images(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))
        with pytest.raises(ValueError):
            ssim(np.zeros((32, 32, 3)), np.zeros((32, 31, 3)))


class TestHelpers:
    def test_quantize_8bit_roundtrip_values(self):
        vals = np.array([0.0, 1.0, 128.0 / 255.0])
        np.testing.assert_array_equal(quantize_8bit(vals), vals)

    def test_compare_images_report(self, rng):
        img = rng.uniform(size=(24, 24, 3))
        report = compare_images(img, img)
        assert report.psnr == PSNR_CAP
        assert report.ssim == 1.0

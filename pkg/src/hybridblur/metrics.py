"""PSNR and SSIM between rendered images.

Images are float arrays with values in [0, 1]. Both metrics compare at full
precision by default; pass quantize=True to round through 8 bits first
(what a screenshot-based comparison would see).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .scene import luminance

PSNR_CAP = 99.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_C1 = 0.01 ** 2
_C2 = 0.03 ** 2


@dataclass
class MetricReport:
    psnr: float
    ssim: float


def quantize_8bit(img) -> np.ndarray:
    a = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.rint(a * 255.0) / 255.0


def _check_pair(a, b):
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"resolution mismatch: {x.shape} vs {y.shape}")
    return x, y


def psnr(a, b, quantize: bool = False) -> float:
    """Peak signal-to-noise ratio in dB over all channels, capped at 99."""
    x, y = _check_pair(a, b)
    if quantize:
        x, y = quantize_8bit(x), quantize_8bit(y)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP)


def _gaussian_window():
    half = _SSIM_WINDOW // 2
    coords = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(coords ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    k = np.outer(g, g)
    return k / k.sum()


_WINDOW = _gaussian_window()


def _local_mean(img):
    return ndimage.correlate(img, _WINDOW, mode="constant")


def _ssim_plane(x, y) -> np.ndarray:
    half = _SSIM_WINDOW // 2
    mu1 = _local_mean(x)
    mu2 = _local_mean(y)
    sigma1 = _local_mean(x * x) - mu1 * mu1
    sigma2 = _local_mean(y * y) - mu2 * mu2
    sigma12 = _local_mean(x * y) - mu1 * mu2
    s = ((2.0 * mu1 * mu2 + _C1) * (2.0 * sigma12 + _C2)) / (
        (mu1 * mu1 + mu2 * mu2 + _C1) * (sigma1 + sigma2 + _C2)
    )
    # keep only fully populated windows
    return s[half:-half, half:-half]


def ssim(a, b, quantize: bool = False, channel: str = "luma") -> float:
    """Mean structural similarity with an 11x11 Gaussian window, sigma 1.5.

    channel selects the comparison plane: "luma" (default) or "rgb"
    (channel-wise mean).
    """
    x, y = _check_pair(a, b)
    if x.shape[0] < _SSIM_WINDOW or x.shape[1] < _SSIM_WINDOW:
        raise ValueError("images smaller than the SSIM window")
    if quantize:
        x, y = quantize_8bit(x), quantize_8bit(y)
    if channel == "luma":
        if x.ndim == 3:
            x, y = luminance(x), luminance(y)
        return float(np.mean(_ssim_plane(x, y)))
    if channel == "rgb":
        if x.ndim != 3:
            raise ValueError("rgb channel mode needs 3-channel images")
        vals = [np.mean(_ssim_plane(x[..., c], y[..., c])) for c in range(3)]
        return float(np.mean(vals))
    raise ValueError(f"unknown channel mode {channel!r}")


def compare_images(a, b, quantize: bool = False) -> MetricReport:
    return MetricReport(psnr=psnr(a, b, quantize=quantize),
                        ssim=ssim(a, b, quantize=quantize))

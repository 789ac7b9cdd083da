"""PSNR on the Y channel and SSIM, the two evaluation metrics.

Both metrics operate on the BT.601 studio-swing luma plane. SSIM uses the
canonical constants of Wang et al.: an 11x11 Gaussian window with sigma
1.5, K1 = 0.01, K2 = 0.03, dynamic range 255, and valid-region windowing
(no padding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import DimensionError, RgbImage, rgb_to_ycbcr

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricResult:
    psnr_y: float  # dB; math.inf when the Y planes are identical
    ssim: float


def _check_dims(a: RgbImage, b: RgbImage) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionError(
            f"image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def psnr_y(a: RgbImage, b: RgbImage) -> float:
    """Peak signal-to-noise ratio on the luma planes, in dB."""
    _check_dims(a, b)
    ya = rgb_to_ycbcr(a).y.data
    yb = rgb_to_ycbcr(b).y.data
    mse = float(np.mean((ya - yb) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable valid-mode correlation (symmetric kernel)
    out = sliding_window_view(img, len(kernel), axis=0) @ kernel
    return sliding_window_view(out, len(kernel), axis=1) @ kernel


def ssim_y(a: RgbImage, b: RgbImage) -> float:
    """Mean local SSIM over the luma planes."""
    _check_dims(a, b)
    if a.width < SSIM_WINDOW or a.height < SSIM_WINDOW:
        raise DimensionError(
            f"image {a.width}x{a.height} is smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    ya = rgb_to_ycbcr(a).y.data
    yb = rgb_to_ycbcr(b).y.data
    kernel = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)

    mu1 = _filter_valid(ya, kernel)
    mu2 = _filter_valid(yb, kernel)
    sigma1 = _filter_valid(ya * ya, kernel) - mu1 * mu1
    sigma2 = _filter_valid(yb * yb, kernel) - mu2 * mu2
    sigma12 = _filter_valid(ya * yb, kernel) - mu1 * mu2

    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    ssim_map = ((2.0 * mu1 * mu2 + c1) * (2.0 * sigma12 + c2)) / (
        (mu1 * mu1 + mu2 * mu2 + c1) * (sigma1 + sigma2 + c2)
    )
    return float(ssim_map.mean())


def evaluate(a: RgbImage, b: RgbImage) -> MetricResult:
    """Both metrics for one image pair."""
    return MetricResult(psnr_y=psnr_y(a, b), ssim=ssim_y(a, b))

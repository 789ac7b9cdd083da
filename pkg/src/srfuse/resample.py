"""Bicubic resampling with the Catmull-Rom kernel (a = -0.5).

Follows the conventions of the mainstream SR toolchains: output pixel
centers map to (x + 0.5) * (in / out) - 0.5 in input coordinates, samples
outside the image replicate the nearest edge pixel, and when shrinking the
kernel is stretched by the scale factor so the downsample is antialiased.
One routine therefore serves as both the D (downsample) and U (upsample)
operator of the weight-mask computation.
"""

from __future__ import annotations

import math

import numpy as np

from .image import ImagePlane, RgbImage

_SUPPORT = 2.0  # half-width of the cubic kernel at native scale


def cubic_kernel(x):
    """Cubic convolution weight with a = -0.5 (Catmull-Rom). Elementwise."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2 = x * x
    x3 = x2 * x
    return np.where(
        x <= 1.0,
        1.5 * x3 - 2.5 * x2 + 1.0,
        np.where(x < 2.0, -0.5 * x3 + 2.5 * x2 - 4.0 * x + 2.0, 0.0),
    )


def _axis_weights(in_size: int, out_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-output-sample tap weights and (edge-clamped) source indices."""
    scale = out_size / in_size
    kernel_scale = min(scale, 1.0)  # stretch the kernel when shrinking
    support = _SUPPORT / kernel_scale
    u = (np.arange(out_size, dtype=np.float64) + 0.5) / scale - 0.5
    left = np.floor(u - support).astype(np.int64) + 1
    taps = int(math.ceil(2.0 * support)) + 2
    indices = left[:, None] + np.arange(taps)
    weights = cubic_kernel((u[:, None] - indices) * kernel_scale)
    weights /= weights.sum(axis=1, keepdims=True)
    indices = np.clip(indices, 0, in_size - 1)
    return weights, indices


def _resample_array(arr: np.ndarray, out_width: int, out_height: int) -> np.ndarray:
    if out_height != arr.shape[0]:
        weights, indices = _axis_weights(arr.shape[0], out_height)
        arr = np.einsum("opw,op->ow", arr.take(indices, axis=0), weights)
    if out_width != arr.shape[1]:
        weights, indices = _axis_weights(arr.shape[1], out_width)
        arr = np.einsum("hop,op->ho", arr.take(indices, axis=1), weights)
    return arr


def bicubic_resample(plane: ImagePlane, out_width: int, out_height: int) -> ImagePlane:
    """Resample a plane to the given size; output is clamped to [0, 255]."""
    if out_width < 1 or out_height < 1:
        raise ValueError(f"output size must be positive, got {out_width}x{out_height}")
    out = _resample_array(plane.data, out_width, out_height)
    return ImagePlane(np.clip(out, 0.0, 255.0))


def resample_rgb(img: RgbImage, out_width: int, out_height: int) -> RgbImage:
    """Apply bicubic_resample independently to the r, g, b planes."""
    r, g, b = (bicubic_resample(p, out_width, out_height) for p in img.planes)
    return RgbImage(r, g, b)


def scaled_dims(width: int, height: int, factor: float) -> tuple[int, int]:
    """Output dimensions when resampling by a scale factor: ceil(in * factor)."""
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    return max(1, math.ceil(width * factor)), max(1, math.ceil(height * factor))


def resample_by_factor(plane: ImagePlane, factor: float) -> ImagePlane:
    """Resample by a scale factor; downsampling by k gives ceil(in / k) dims."""
    out_w, out_h = scaled_dims(plane.width, plane.height, factor)
    return bicubic_resample(plane, out_w, out_h)

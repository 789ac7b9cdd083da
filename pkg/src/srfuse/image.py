"""Image containers, BT.601 color conversion, and PNG I/O.

Pixel data is carried as double-precision reals in the nominal range
[0, 255] throughout the pipeline; quantization to 8 bits happens only
when writing PNG files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class DimensionError(ValueError):
    """Image dimensions do not satisfy an operation's contract."""


def _validated_plane(data) -> np.ndarray:
    arr = np.array(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"plane data must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"plane must be at least 1x1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("plane contains non-finite samples")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """Single-channel 2-D grid of real-valued samples, row-major.

    Immutable after construction; the backing array is a private copy
    with the writeable flag cleared, so planes are safe to share across
    threads.
    """

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _validated_plane(self.data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def full(cls, width: int, height: int, value: float) -> "ImagePlane":
        return cls(np.full((height, width), value, dtype=np.float64))


def _check_plane_dims(planes, kind: str) -> None:
    shapes = {p.data.shape for p in planes}
    if len(shapes) != 1:
        raise DimensionError(f"{kind} planes must share dimensions, got {sorted(shapes)}")


@dataclass(frozen=True, eq=False)
class RgbImage:
    """Three-plane RGB image; the storage color space for all inputs."""

    r: ImagePlane
    g: ImagePlane
    b: ImagePlane

    def __post_init__(self):
        _check_plane_dims((self.r, self.g, self.b), "rgb")

    @property
    def width(self) -> int:
        return self.r.width

    @property
    def height(self) -> int:
        return self.r.height

    @property
    def planes(self) -> tuple[ImagePlane, ImagePlane, ImagePlane]:
        return (self.r, self.g, self.b)

    @classmethod
    def from_array(cls, arr) -> "RgbImage":
        """Build from an (H, W, 3) array."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
        return cls(ImagePlane(arr[:, :, 0]), ImagePlane(arr[:, :, 1]), ImagePlane(arr[:, :, 2]))

    def to_array(self) -> np.ndarray:
        """Return an (H, W, 3) float64 copy."""
        return np.stack([self.r.data, self.g.data, self.b.data], axis=2)


@dataclass(frozen=True, eq=False)
class YcbcrImage:
    """Three-plane YCbCr image; the y plane is the space all metrics use."""

    y: ImagePlane
    cb: ImagePlane
    cr: ImagePlane

    def __post_init__(self):
        _check_plane_dims((self.y, self.cb, self.cr), "ycbcr")

    @property
    def width(self) -> int:
        return self.y.width

    @property
    def height(self) -> int:
        return self.y.height


# ITU-R BT.601 studio-swing conversion (Y in [16, 235], Cb/Cr in [16, 240]),
# the PSNR_Y convention of the SR literature.
_RGB_TO_YCBCR = np.array(
    [
        [65.481, 128.553, 24.966],
        [-37.797, -74.203, 112.0],
        [112.0, -93.786, -18.214],
    ]
) / 255.0
_YCBCR_OFFSET = np.array([16.0, 128.0, 128.0])
_YCBCR_TO_RGB = np.linalg.inv(_RGB_TO_YCBCR)


def rgb_to_ycbcr(img: RgbImage) -> YcbcrImage:
    """Convert to BT.601 studio-swing YCbCr. Dimensions are preserved."""
    r, g, b = img.r.data, img.g.data, img.b.data
    m = _RGB_TO_YCBCR
    y = _YCBCR_OFFSET[0] + m[0, 0] * r + m[0, 1] * g + m[0, 2] * b
    cb = _YCBCR_OFFSET[1] + m[1, 0] * r + m[1, 1] * g + m[1, 2] * b
    cr = _YCBCR_OFFSET[2] + m[2, 0] * r + m[2, 1] * g + m[2, 2] * b
    return YcbcrImage(ImagePlane(y), ImagePlane(cb), ImagePlane(cr))


def ycbcr_to_rgb(img: YcbcrImage) -> RgbImage:
    """Inverse of :func:`rgb_to_ycbcr` (numerical inverse of the same matrix)."""
    y = img.y.data - _YCBCR_OFFSET[0]
    cb = img.cb.data - _YCBCR_OFFSET[1]
    cr = img.cr.data - _YCBCR_OFFSET[2]
    m = _YCBCR_TO_RGB
    r = m[0, 0] * y + m[0, 1] * cb + m[0, 2] * cr
    g = m[1, 0] * y + m[1, 1] * cb + m[1, 2] * cr
    b = m[2, 0] * y + m[2, 1] * cb + m[2, 2] * cr
    return RgbImage(ImagePlane(r), ImagePlane(g), ImagePlane(b))


def luma(img: RgbImage) -> ImagePlane:
    """BT.601 studio-swing Y plane of an RGB image."""
    return rgb_to_ycbcr(img).y


def center_crop(img: RgbImage, width: int, height: int) -> RgbImage:
    """Crop to width x height around the image center (floor-biased offsets)."""
    if width < 1 or height < 1:
        raise ValueError(f"crop size must be positive, got {width}x{height}")
    if width > img.width or height > img.height:
        raise DimensionError(
            f"crop {width}x{height} exceeds image {img.width}x{img.height}"
        )
    x0 = (img.width - width) // 2
    y0 = (img.height - height) // 2
    return RgbImage.from_array(img.to_array()[y0 : y0 + height, x0 : x0 + width])


def crop(img: RgbImage, x: int, y: int, width: int, height: int) -> RgbImage:
    """Extract the subarray at (x, y) with the given size."""
    if width < 1 or height < 1:
        raise ValueError(f"crop size must be positive, got {width}x{height}")
    if x < 0 or y < 0 or x + width > img.width or y + height > img.height:
        raise DimensionError(
            f"crop region ({x},{y},{width},{height}) outside image "
            f"{img.width}x{img.height}"
        )
    return RgbImage.from_array(img.to_array()[y : y + height, x : x + width])


def _quantize(arr: np.ndarray) -> np.ndarray:
    # round half away from zero, which for the clamped nonnegative range
    # is floor(x + 0.5)
    clipped = np.clip(arr, 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)


def load_png(path) -> RgbImage:
    """Read an 8-bit PNG as an RGB image with exact real values 0.0-255.0."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return RgbImage.from_array(arr)


def save_png(img: RgbImage, path) -> None:
    """Write as 8-bit RGB PNG; reals round half away from zero and clamp."""
    Image.fromarray(_quantize(img.to_array()), mode="RGB").save(Path(path), format="PNG")


def save_gray_png(plane: ImagePlane, path, scale: float = 1.0) -> None:
    """Write a single plane as 8-bit grayscale PNG, optionally rescaled."""
    Image.fromarray(_quantize(plane.data * scale), mode="L").save(Path(path), format="PNG")

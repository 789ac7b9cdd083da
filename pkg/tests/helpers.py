"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from srfuse.dataset import DistortionSpec, make_synthetic_candidates
from srfuse.image import RgbImage
from srfuse.resample import resample_rgb


def random_rgb(rng, width: int, height: int, lo: float = 0.0, hi: float = 255.0) -> RgbImage:
    return RgbImage.from_array(rng.uniform(lo, hi, (height, width, 3)))


def smooth_rgb(rng, width: int, height: int, cell: int = 4,
               lo: float = 20.0, hi: float = 235.0) -> RgbImage:
    """Natural-image-like content: random low-resolution base, upsampled."""
    base = rng.uniform(lo, hi, (max(2, height // cell), max(2, width // cell), 3))
    return resample_rgb(RgbImage.from_array(base), width, height)


def textured_gt(seed: int, size: int = 96, cell: int = 8, texture: float = 8.0) -> RgbImage:
    """Smooth medium-scale structure plus mild fine texture.

    The structure scale keeps region distortions visible after bicubic
    downsampling, which is what the adaptive masks key on.
    """
    rng = np.random.default_rng(seed)
    base = smooth_rgb(rng, size, size, cell=cell, lo=40.0, hi=215.0).to_array()
    if texture:
        base = base + rng.uniform(-texture, texture, base.shape)
    return RgbImage.from_array(np.clip(base, 0.0, 255.0))


def blur_distortion(seed: int) -> DistortionSpec:
    """Strip blur with per-candidate severity growth; candidate 0 stays best."""
    return DistortionSpec(kind="blur", strength=1.5, ramp=1.0, seed=seed)


def acceptance_set(seed: int, n: int = 3, size: int = 96, scale: int = 4):
    """One seeded synthetic candidate set plus its ground truth."""
    gt = textured_gt(1000 + seed, size=size)
    cset = make_synthetic_candidates(gt, n, blur_distortion(seed), scale)
    return gt, cset

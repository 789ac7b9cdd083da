"""Two-step-weighting posterior fusion of single-reference SR outputs.

The fusion combines N super-resolution candidates of one low-resolution
input. Step one computes an adaptive per-pixel weight mask per candidate:
the candidate is bicubically downsampled to the input size, the luma
discrepancy against the input is penalized exponentially, and the weight
field is upsampled back to candidate size. Step two derives per-candidate
global weights from how often each candidate wins the per-pixel argmax,
then fuses with the combined weights.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .image import DimensionError, ImagePlane, RgbImage, center_crop, rgb_to_ycbcr
from .resample import bicubic_resample, resample_rgb

log = logging.getLogger(__name__)

CROP_POLICIES = ("center", "strict")


@dataclass(frozen=True)
class FusionConfig:
    """Fusion parameters.

    beta penalizes luma discrepancy between a downsampled candidate and
    the LR input; beta_g scales the global per-candidate weight exponent.
    Discrepancies are measured on intensities divided by intensity_scale,
    so the default puts them in [0, 1].
    """

    beta: float = 300.0
    beta_g: float = 2.0
    scale: int = 4
    weight_epsilon: float = 1e-12
    intensity_scale: float = 255.0
    crop_policy: str = "center"

    def __post_init__(self):
        if self.beta < 0 or self.beta_g < 0:
            raise ValueError("beta and beta_g must be nonnegative")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.weight_epsilon <= 0:
            raise ValueError("weight_epsilon must be positive")
        if self.intensity_scale <= 0:
            raise ValueError("intensity_scale must be positive")
        if self.crop_policy not in CROP_POLICIES:
            raise ValueError(f"crop_policy must be one of {CROP_POLICIES}")


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """The LR input plus the ordered SR candidates derived from it.

    Index 0 is the output obtained with the most relevant reference image;
    relevance decreases with index.
    """

    lr_input: RgbImage
    candidates: tuple[RgbImage, ...]
    scale: int = 4

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if len(self.candidates) < 1:
            raise ValueError("candidate set needs at least one candidate")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        want_w = self.lr_input.width * self.scale
        want_h = self.lr_input.height * self.scale
        for i, cand in enumerate(self.candidates):
            if (cand.width, cand.height) != (want_w, want_h):
                raise DimensionError(
                    f"candidate {i} is {cand.width}x{cand.height}, expected "
                    f"{want_w}x{want_h} (lr {self.lr_input.width}x{self.lr_input.height}"
                    f" x scale {self.scale})"
                )

    @property
    def count(self) -> int:
        return len(self.candidates)

    @classmethod
    def from_images(
        cls,
        lr_input: RgbImage,
        candidates,
        scale: int = 4,
        crop_policy: str = "center",
    ) -> "CandidateSet":
        """Build a set, harmonizing candidate dimensions per the crop policy.

        Under "center", candidates larger than lr * scale are center-cropped
        to that target (the same scheme the RefSR modules are assumed to
        use); "strict" requires exact dimensions.
        """
        if crop_policy not in CROP_POLICIES:
            raise ValueError(f"crop_policy must be one of {CROP_POLICIES}")
        want_w = lr_input.width * scale
        want_h = lr_input.height * scale
        fixed = []
        for i, cand in enumerate(candidates):
            if (cand.width, cand.height) == (want_w, want_h):
                fixed.append(cand)
            elif crop_policy == "center" and cand.width >= want_w and cand.height >= want_h:
                log.info(
                    "center-cropping candidate %d from %dx%d to %dx%d",
                    i, cand.width, cand.height, want_w, want_h,
                )
                fixed.append(center_crop(cand, want_w, want_h))
            else:
                raise DimensionError(
                    f"candidate {i} is {cand.width}x{cand.height}, cannot be "
                    f"harmonized to {want_w}x{want_h} under policy {crop_policy!r}"
                )
        return cls(lr_input, tuple(fixed), scale)


@dataclass(frozen=True, eq=False)
class WeightMask:
    """Per-pixel adaptive weight map for one SR candidate."""

    weights: ImagePlane
    source_index: int


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """One-hot per-pixel argmax indicator for one SR candidate."""

    mask: ImagePlane
    source_index: int

    @property
    def area(self) -> float:
        return float(self.mask.data.sum())


@dataclass(frozen=True, eq=False)
class FusionReport:
    """Fusion output plus the per-candidate weighting diagnostics."""

    fused: RgbImage
    global_weights: tuple[float, ...]
    mask_areas: tuple[float, ...]
    weight_masks: tuple[WeightMask, ...] | None = None
    binary_masks: tuple[BinaryMask, ...] | None = None


def naive_fuse(cset: CandidateSet) -> RgbImage:
    """Unweighted per-pixel mean of all candidates."""
    stack = np.stack([c.to_array() for c in cset.candidates])
    return RgbImage.from_array(stack.sum(axis=0) / cset.count)


def adaptive_weight_mask(
    candidate: RgbImage,
    lr_input: RgbImage,
    beta: float,
    scale: int,
    *,
    weight_epsilon: float = 1e-12,
    intensity_scale: float = 255.0,
    source_index: int = 0,
) -> WeightMask:
    """Per-pixel consistency weight of one candidate against the LR input.

    The candidate is bicubically downsampled to the input size, the squared
    luma discrepancy (on intensities divided by intensity_scale) is
    penalized as exp(-beta * d^2), and the resulting field is bicubically
    upsampled back to the candidate size and clamped to
    [weight_epsilon, 1].
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if (candidate.width, candidate.height) != (
        lr_input.width * scale,
        lr_input.height * scale,
    ):
        raise DimensionError(
            f"candidate {candidate.width}x{candidate.height} does not match "
            f"lr {lr_input.width}x{lr_input.height} x scale {scale}"
        )
    if beta == 0.0:
        # exp(0) = 1 and upsampling a constant field is the identity, so the
        # all-ones mask is exact
        weights = np.ones((candidate.height, candidate.width))
    else:
        down = resample_rgb(candidate, lr_input.width, lr_input.height)
        d = (rgb_to_ycbcr(down).y.data - rgb_to_ycbcr(lr_input).y.data) / intensity_scale
        field = np.exp(-beta * d * d)
        up = bicubic_resample(ImagePlane(field), candidate.width, candidate.height)
        weights = np.clip(up.data, weight_epsilon, 1.0)
    return WeightMask(ImagePlane(weights), source_index)


def masked_fuse(candidates, masks) -> RgbImage:
    """Per-pixel weighted average using one shared mask per candidate."""
    candidates = list(candidates)
    masks = list(masks)
    if not candidates:
        raise ValueError("no candidates to fuse")
    if len(candidates) != len(masks):
        raise ValueError(f"{len(candidates)} candidates but {len(masks)} masks")
    shape = candidates[0].r.data.shape
    for cand, mask in zip(candidates, masks):
        if cand.r.data.shape != shape or mask.weights.data.shape != shape:
            raise DimensionError("candidates and masks must all share dimensions")
    weights = np.stack([m.weights.data for m in masks])
    stack = np.stack([c.to_array() for c in candidates])
    num = (stack * weights[:, :, :, None]).sum(axis=0)
    den = weights.sum(axis=0)
    return RgbImage.from_array(num / den[:, :, None])


def binary_masks(masks) -> list[BinaryMask]:
    """One-hot per-pixel argmax over the weight masks; ties go to the lowest index."""
    masks = list(masks)
    if not masks:
        raise ValueError("no masks given")
    shape = masks[0].weights.data.shape
    for m in masks:
        if m.weights.data.shape != shape:
            raise DimensionError("weight masks must share dimensions")
    stack = np.stack([m.weights.data for m in masks])
    winner = np.argmax(stack, axis=0)  # first maximum wins
    out = []
    for i, m in enumerate(masks):
        out.append(BinaryMask(ImagePlane((winner == i).astype(np.float64)), m.source_index))
    return out


def global_weights(binary, beta_g: float) -> list[float]:
    """Per-candidate weight exp(beta_g * area), rescaled by the common
    factor exp(-beta_g * max area) for numerical stability.

    The rescaling cancels in the normalized fusion, so the returned values
    are equivalent to the raw definition; the largest weight is always 1.
    """
    binary = list(binary)
    if not binary:
        raise ValueError("no binary masks given")
    if beta_g < 0:
        raise ValueError("beta_g must be nonnegative")
    areas = np.array([b.area for b in binary])
    return [float(w) for w in np.exp(beta_g * (areas - areas.max()))]


def combined_fuse(candidates, masks, gweights) -> RgbImage:
    """Fuse with the combined per-pixel weights w_i * W_i(p), one normalization."""
    weights = np.stack([m.weights.data for m in masks])
    combined = np.asarray(gweights)[:, None, None] * weights
    stack = np.stack([c.to_array() for c in candidates])
    num = (stack * combined[:, :, :, None]).sum(axis=0)
    den = combined.sum(axis=0)
    return RgbImage.from_array(num / den[:, :, None])


def compute_masks(cset: CandidateSet, config: FusionConfig, threads: int = 1) -> list[WeightMask]:
    """Adaptive weight masks for every candidate, in candidate order.

    Mask computation is independent per candidate, so it may run on a
    thread pool; results do not depend on the thread count.
    """
    def one(i):
        return adaptive_weight_mask(
            cset.candidates[i],
            cset.lr_input,
            config.beta,
            cset.scale,
            weight_epsilon=config.weight_epsilon,
            intensity_scale=config.intensity_scale,
            source_index=i,
        )

    indices = range(cset.count)
    if threads > 1 and cset.count > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, indices))
    return [one(i) for i in indices]


def fuse(
    cset: CandidateSet,
    config: FusionConfig | None = None,
    *,
    export_masks: bool = False,
    threads: int = 1,
) -> FusionReport:
    """Full two-step-weighting fusion of a candidate set.

    Computes the adaptive weight masks, the one-hot argmax masks and their
    areas, the global per-candidate weights, and the fused image under the
    combined per-pixel weights w_i * W_i(p).
    """
    if config is None:
        config = FusionConfig(scale=cset.scale)
    if config.scale != cset.scale:
        raise ValueError(f"config scale {config.scale} != set scale {cset.scale}")
    masks = compute_masks(cset, config, threads=threads)
    binary = binary_masks(masks)
    gweights = global_weights(binary, config.beta_g)
    fused = combined_fuse(cset.candidates, masks, gweights)
    return FusionReport(
        fused=fused,
        global_weights=tuple(gweights),
        mask_areas=tuple(b.area for b in binary),
        weight_masks=tuple(masks) if export_masks else None,
        binary_masks=tuple(binary) if export_masks else None,
    )

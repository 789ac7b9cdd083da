"""Evaluation-input construction: LR images, simulated telephoto references,
synthetic SR candidates, and the on-disk dataset layout with its manifest.

Real RefSR model outputs are external inputs to this toolkit; the synthetic
candidates generated here (ground truth corrupted inside disjoint regions)
stand in for them at desk scale so the fusion and sweep machinery can be
exercised end to end.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .fusion import CandidateSet
from .image import DimensionError, RgbImage, center_crop, crop, load_png, save_png
from .resample import resample_rgb

log = logging.getLogger(__name__)

DISTORTION_KINDS = ("noise", "blur")


class ManifestError(ValueError):
    """A manifest file is malformed or incomplete."""


@dataclass(frozen=True)
class PrepSpec:
    """Parameters for LR/telephoto generation.

    crop_region is (x, y, w, h) in HR pixel coordinates; zoom_factor >= 1
    optionally magnifies the telephoto crop.
    """

    scale: int = 4
    crop_region: tuple[int, int, int, int] | None = None
    zoom_factor: float = 1.0

    def __post_init__(self):
        if self.scale < 2:
            raise ValueError("scale must be >= 2")
        if self.zoom_factor < 1.0:
            raise ValueError("zoom_factor must be >= 1")


@dataclass(frozen=True)
class DistortionSpec:
    """Synthetic candidate corruption.

    kind "noise" adds seeded uniform noise in [-strength, strength];
    kind "blur" applies a separable Gaussian blur with sigma = strength.
    Candidate i is corrupted at strength * (1 + ramp * i), so with ramp > 0
    the first candidate has the best quality, matching the convention that
    index 0 comes from the most relevant reference.
    """

    kind: str = "noise"
    strength: float = 24.0
    ramp: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise ValueError(f"kind must be one of {DISTORTION_KINDS}")
        if self.strength < 0 or self.ramp < 0:
            raise ValueError("strength and ramp must be nonnegative")


def mod_crop(hr: RgbImage, scale: int) -> RgbImage:
    """Center-crop to the largest size divisible by scale."""
    w = (hr.width // scale) * scale
    h = (hr.height // scale) * scale
    if w < scale or h < scale:
        raise DimensionError(
            f"image {hr.width}x{hr.height} too small for scale {scale}"
        )
    if (w, h) != (hr.width, hr.height):
        log.info("center-cropping %dx%d to %dx%d for scale %d",
                 hr.width, hr.height, w, h, scale)
        return center_crop(hr, w, h)
    return hr


def make_lr(hr: RgbImage, scale: int) -> RgbImage:
    """Bicubic downsample by the integer scale (center-cropping if needed)."""
    hr = mod_crop(hr, scale)
    return resample_rgb(hr, hr.width // scale, hr.height // scale)


def make_telephoto(hr: RgbImage, spec: PrepSpec) -> RgbImage:
    """Simulate a zoomed-in reference by cropping (and optionally magnifying)."""
    region = spec.crop_region or (0, 0, hr.width, hr.height)
    x, y, w, h = region
    out = crop(hr, x, y, w, h)
    if spec.zoom_factor != 1.0:
        out = resample_rgb(
            out,
            max(1, round(w * spec.zoom_factor)),
            max(1, round(h * spec.zoom_factor)),
        )
    return out


def disjoint_regions(width: int, height: int, n: int) -> list[tuple[int, int, int, int]]:
    """n disjoint vertical strips covering the image, as (x, y, w, h)."""
    if n < 1:
        raise ValueError("need at least one region")
    if width < n:
        raise ValueError(f"cannot carve {n} disjoint regions from width {width}")
    edges = [round(i * width / n) for i in range(n + 1)]
    return [(edges[i], 0, edges[i + 1] - edges[i], height) for i in range(n)]


def _gaussian_blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    radius = max(1, math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    k /= k.sum()
    out = np.pad(arr, ((radius, radius), (0, 0), (0, 0)), mode="edge")
    out = sliding_window_view(out, 2 * radius + 1, axis=0) @ k
    out = np.pad(out, ((0, 0), (radius, radius), (0, 0)), mode="edge")
    return sliding_window_view(out, 2 * radius + 1, axis=1) @ k


def _distort_region(arr, region, spec: DistortionSpec, strength: float, rng) -> None:
    x, y, w, h = region
    if strength == 0.0:
        return
    if spec.kind == "noise":
        noise = rng.uniform(-strength, strength, (h, w, 3))
        arr[y : y + h, x : x + w] = np.clip(arr[y : y + h, x : x + w] + noise, 0.0, 255.0)
    else:
        blurred = _gaussian_blur(arr, strength)
        arr[y : y + h, x : x + w] = blurred[y : y + h, x : x + w]


def make_synthetic_candidates(
    gt: RgbImage,
    n: int,
    distortion: DistortionSpec,
    scale: int = 4,
) -> CandidateSet:
    """Candidate set where candidate i equals gt except in its own strip.

    Also derives the LR input from gt, so a perfect fusion would recover
    gt exactly. Deterministic given the distortion seed.
    """
    if n < 2:
        raise ValueError("need at least two candidates")
    gt = mod_crop(gt, scale)
    regions = disjoint_regions(gt.width, gt.height, n)
    rng = np.random.default_rng(distortion.seed)
    candidates = []
    for i, region in enumerate(regions):
        arr = gt.to_array()
        _distort_region(arr, region, distortion, distortion.strength * (1.0 + distortion.ramp * i), rng)
        candidates.append(RgbImage.from_array(arr))
    return CandidateSet(make_lr(gt, scale), tuple(candidates), scale)


# --- on-disk layout --------------------------------------------------------
#
#   <root>/<id>_gt.png   ground truth (after mod-crop)
#   <root>/<id>_lr.png   low-resolution input
#   <root>/<id>_ref<k>.png  telephoto reference crops (optional)
#   <root>/<id>_sr<k>.png   SR candidates, k = 1..N in relevance order
#
# plus a manifest of key=value lines, one block per candidate set:
#
#   set=<id>
#   gt=<relative path>
#   lr=<relative path>
#   sr=<relative path>      (repeated, candidate order)

MANIFEST_NAME = "manifest.txt"


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    lr_path: Path
    sr_paths: tuple[Path, ...]
    gt_path: Path | None = None


def write_manifest(entries, path) -> None:
    path = Path(path)
    root = path.parent
    lines = []
    for e in entries:
        lines.append(f"set={e.image_id}")
        if e.gt_path is not None:
            lines.append(f"gt={Path(e.gt_path).relative_to(root).as_posix()}")
        lines.append(f"lr={Path(e.lr_path).relative_to(root).as_posix()}")
        for sr in e.sr_paths:
            lines.append(f"sr={Path(sr).relative_to(root).as_posix()}")
        lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8", newline="\n")


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such manifest: {path}")
    root = path.parent
    entries: list[ManifestEntry] = []
    current: dict | None = None

    def flush():
        nonlocal current
        if current is None:
            return
        if "lr" not in current or not current["sr"]:
            raise ManifestError(
                f"manifest set {current['id']!r} needs an lr line and at least one sr line"
            )
        entries.append(
            ManifestEntry(
                image_id=current["id"],
                lr_path=root / current["lr"],
                sr_paths=tuple(root / p for p in current["sr"]),
                gt_path=(root / current["gt"]) if "gt" in current else None,
            )
        )
        current = None

    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ManifestError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key == "set":
            flush()
            current = {"id": value, "sr": []}
        elif current is None:
            raise ManifestError(f"{path}:{lineno}: {key!r} before any set= line")
        elif key == "sr":
            current["sr"].append(value)
        elif key in ("gt", "lr"):
            current[key] = value
        else:
            raise ManifestError(f"{path}:{lineno}: unknown key {key!r}")
    flush()
    return entries


def load_candidate_set(entry: ManifestEntry, scale: int = 4,
                       crop_policy: str = "center") -> CandidateSet:
    lr = load_png(entry.lr_path)
    candidates = [load_png(p) for p in entry.sr_paths]
    return CandidateSet.from_images(lr, candidates, scale, crop_policy)


def _telephoto_regions(width: int, height: int, count: int):
    # center crop first, then the four corners, all at half size
    w, h = width // 2, height // 2
    anchors = [
        ((width - w) // 2, (height - h) // 2),
        (0, 0),
        (width - w, 0),
        (0, height - h),
        (width - w, height - h),
    ]
    return [(x, y, w, h) for x, y in anchors[:count]]


def prepare_dataset(
    hr_dir,
    out_dir,
    scale: int = 4,
    count: int = 3,
    distortion: DistortionSpec | None = None,
    refs: int = 0,
) -> list[ManifestEntry]:
    """Build the dataset tree from a directory of HR PNGs and write the manifest.

    Per image: mod-cropped ground truth, LR input, `count` synthetic SR
    candidates, and optionally `refs` telephoto reference crops. The
    distortion seed is combined with the image index so the tree is
    reproducible as a whole.
    """
    hr_dir = Path(hr_dir)
    out_dir = Path(out_dir)
    if distortion is None:
        distortion = DistortionSpec()
    if refs > 5:
        raise ValueError("at most 5 telephoto reference crops are generated")
    hr_paths = sorted(hr_dir.glob("*.png"))
    if not hr_paths:
        raise FileNotFoundError(f"no PNG files in {hr_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for index, hr_path in enumerate(hr_paths):
        image_id = hr_path.stem
        gt = mod_crop(load_png(hr_path), scale)
        per_image = DistortionSpec(
            kind=distortion.kind,
            strength=distortion.strength,
            ramp=distortion.ramp,
            seed=distortion.seed + index,
        )
        cset = make_synthetic_candidates(gt, count, per_image, scale)

        gt_path = out_dir / f"{image_id}_gt.png"
        lr_path = out_dir / f"{image_id}_lr.png"
        save_png(gt, gt_path)
        save_png(cset.lr_input, lr_path)
        sr_paths = []
        for k, cand in enumerate(cset.candidates, start=1):
            sr_path = out_dir / f"{image_id}_sr{k}.png"
            save_png(cand, sr_path)
            sr_paths.append(sr_path)
        for k, region in enumerate(_telephoto_regions(gt.width, gt.height, refs), start=1):
            ref = make_telephoto(gt, PrepSpec(scale=scale, crop_region=region))
            save_png(ref, out_dir / f"{image_id}_ref{k}.png")

        entries.append(
            ManifestEntry(image_id=image_id, lr_path=lr_path,
                          sr_paths=tuple(sr_paths), gt_path=gt_path)
        )

    write_manifest(entries, out_dir / MANIFEST_NAME)
    return entries

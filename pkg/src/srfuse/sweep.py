"""Parameter-sweep harness: beta sweeps, beta_g sweeps, joint heatmaps, and
fusion-count curves over a manifest of candidate sets, emitted as CSV.

All sweeps stage the evaluation the same way (masks are computed once per
beta and reused across beta_g values), so a heatmap row or column is
record-for-record identical to the corresponding 1-D sweep.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .dataset import load_candidate_set, read_manifest
from .fusion import CandidateSet, FusionConfig, binary_masks, combined_fuse, compute_masks, global_weights
from .image import RgbImage, load_png
from .metrics import psnr_y, ssim_y

log = logging.getLogger(__name__)

DEFAULT_BETA_GRID = (0.0, 30.0, 90.0, 180.0, 300.0, 450.0, 630.0, 810.0)
DEFAULT_BETA_G_GRID = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)

CSV_FIELDS = ("image_id", "beta", "beta_g", "n_fused", "psnr_y", "ssim")
MEAN_ID = "__mean__"


def _check_grid(name: str, grid) -> tuple[float, ...]:
    grid = tuple(float(v) for v in grid)
    if not grid:
        raise ValueError(f"{name} must be nonempty")
    if any(v < 0 for v in grid):
        raise ValueError(f"{name} must be nonnegative")
    if list(grid) != sorted(grid):
        raise ValueError(f"{name} must be sorted ascending")
    return grid


@dataclass(frozen=True)
class SweepSpec:
    """Grids and fixed parameters for the sweep operations.

    fixed_beta / fixed_beta_g apply to the fusion-count sweep, where the
    weighting parameters are held constant while the number of fused
    candidates varies. fixed_beta_g defaults to 0 because mask areas are
    raw pixel counts: any beta_g >= ~1/area acts as a hard best-candidate
    selector and would flatten the count curve. An empty fuse_counts means
    1..N per image.
    """

    manifest: Path
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    beta_g_grid: tuple[float, ...] = DEFAULT_BETA_G_GRID
    fuse_counts: tuple[int, ...] = ()
    scale: int = 4
    fixed_beta: float = 300.0
    fixed_beta_g: float = 0.0
    weight_epsilon: float = 1e-12
    intensity_scale: float = 255.0
    crop_policy: str = "center"
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "manifest", Path(self.manifest))
        object.__setattr__(self, "beta_grid", _check_grid("beta_grid", self.beta_grid))
        object.__setattr__(self, "beta_g_grid", _check_grid("beta_g_grid", self.beta_g_grid))
        counts = tuple(int(k) for k in self.fuse_counts)
        if any(k < 1 for k in counts):
            raise ValueError("fuse_counts must be >= 1")
        object.__setattr__(self, "fuse_counts", counts)


@dataclass(frozen=True)
class SweepRecord:
    image_id: str
    beta: float
    beta_g: float
    n_fused: int
    psnr_y: float
    ssim: float


def _sort_key(rec: SweepRecord):
    return (rec.image_id, rec.beta, rec.beta_g, rec.n_fused)


def _config(spec: SweepSpec, beta: float, beta_g: float) -> FusionConfig:
    return FusionConfig(
        beta=beta,
        beta_g=beta_g,
        scale=spec.scale,
        weight_epsilon=spec.weight_epsilon,
        intensity_scale=spec.intensity_scale,
        crop_policy=spec.crop_policy,
    )


def _load_sets(spec: SweepSpec):
    for entry in read_manifest(spec.manifest):
        if entry.gt_path is None:
            raise ValueError(f"manifest set {entry.image_id!r} has no gt line; "
                             "sweeps need ground truth to score against")
        gt = load_png(entry.gt_path)
        cset = load_candidate_set(entry, spec.scale, spec.crop_policy)
        yield entry, gt, cset


def _grid_records(
    image_id: str,
    gt: RgbImage,
    cset: CandidateSet,
    spec: SweepSpec,
    beta_values,
    beta_g_values,
) -> list[SweepRecord]:
    records = []
    for beta in beta_values:
        config = _config(spec, beta, 0.0)
        masks = compute_masks(cset, config, threads=spec.threads)
        binary = binary_masks(masks)
        for beta_g in beta_g_values:
            gweights = global_weights(binary, beta_g)
            fused = combined_fuse(cset.candidates, masks, gweights)
            records.append(
                SweepRecord(
                    image_id=image_id,
                    beta=beta,
                    beta_g=beta_g,
                    n_fused=cset.count,
                    psnr_y=psnr_y(fused, gt),
                    ssim=ssim_y(fused, gt),
                )
            )
    return records


def sweep_beta(spec: SweepSpec) -> list[SweepRecord]:
    """Vary beta with beta_g fixed to 0 (global weighting disabled)."""
    records = []
    for entry, gt, cset in _load_sets(spec):
        records.extend(_grid_records(entry.image_id, gt, cset, spec, spec.beta_grid, (0.0,)))
    return sorted(records, key=_sort_key)


def sweep_beta_g(spec: SweepSpec) -> list[SweepRecord]:
    """Vary beta_g with beta fixed to 0 (per-pixel masking disabled)."""
    records = []
    for entry, gt, cset in _load_sets(spec):
        records.extend(_grid_records(entry.image_id, gt, cset, spec, (0.0,), spec.beta_g_grid))
    return sorted(records, key=_sort_key)


def sweep_heatmap(spec: SweepSpec) -> list[SweepRecord]:
    """Full Cartesian beta x beta_g grid."""
    records = []
    for entry, gt, cset in _load_sets(spec):
        records.extend(
            _grid_records(entry.image_id, gt, cset, spec, spec.beta_grid, spec.beta_g_grid)
        )
    return sorted(records, key=_sort_key)


def sweep_fuse_count(spec: SweepSpec) -> list[SweepRecord]:
    """Cumulatively fuse the first k candidates at the fixed (beta, beta_g).

    Candidates are assumed pre-ordered best-first, so k = 1 scores the
    single best candidate alone.
    """
    records = []
    config_proto = _config(spec, spec.fixed_beta, spec.fixed_beta_g)
    for entry, gt, cset in _load_sets(spec):
        counts = spec.fuse_counts or tuple(range(1, cset.count + 1))
        for k in counts:
            if k > cset.count:
                raise ValueError(
                    f"fuse count {k} exceeds the {cset.count} candidates of "
                    f"set {entry.image_id!r}"
                )
        for k in counts:
            sub = CandidateSet(cset.lr_input, cset.candidates[:k], cset.scale)
            masks = compute_masks(sub, config_proto, threads=spec.threads)
            binary = binary_masks(masks)
            gweights = global_weights(binary, spec.fixed_beta_g)
            fused = combined_fuse(sub.candidates, masks, gweights)
            records.append(
                SweepRecord(
                    image_id=entry.image_id,
                    beta=spec.fixed_beta,
                    beta_g=spec.fixed_beta_g,
                    n_fused=k,
                    psnr_y=psnr_y(fused, gt),
                    ssim=ssim_y(fused, gt),
                )
            )
    return sorted(records, key=_sort_key)


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return format(value, ".12g")


def mean_records(records) -> list[SweepRecord]:
    """Per-grid-point unweighted means over images.

    Images whose PSNR is the infinity sentinel are excluded from the PSNR
    mean (and counted via the log); SSIM means cover all images.
    """
    groups: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        groups.setdefault((rec.beta, rec.beta_g, rec.n_fused), []).append(rec)
    means = []
    for (beta, beta_g, n_fused), group in sorted(groups.items()):
        finite = [r.psnr_y for r in group if not math.isinf(r.psnr_y)]
        skipped = len(group) - len(finite)
        if skipped:
            log.info(
                "grid point beta=%g beta_g=%g n=%d: %d image(s) with infinite "
                "PSNR excluded from the mean", beta, beta_g, n_fused, skipped,
            )
        psnr_mean = sum(finite) / len(finite) if finite else math.inf
        ssim_mean = sum(r.ssim for r in group) / len(group)
        means.append(
            SweepRecord(MEAN_ID, beta, beta_g, n_fused, psnr_mean, ssim_mean)
        )
    return means


def write_csv(records, path) -> None:
    """Write records (sorted) plus per-grid-point __mean__ rows; UTF-8, LF."""
    records = sorted(records, key=_sort_key)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for rec in records + mean_records(records):
            writer.writerow(
                [
                    rec.image_id,
                    format(rec.beta, "g"),
                    format(rec.beta_g, "g"),
                    rec.n_fused,
                    _fmt(rec.psnr_y),
                    _fmt(rec.ssim),
                ]
            )

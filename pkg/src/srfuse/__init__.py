"""srfuse: posterior fusion of multi-reference super-resolution outputs.

Fuses several single-reference SR results of one low-resolution image via
adaptive per-pixel weight masks plus global reference-quality weights, and
ships the evaluation harness (PSNR_Y/SSIM, parameter sweeps, dataset
preparation) around it.
"""

from .dataset import (
    DistortionSpec,
    ManifestEntry,
    ManifestError,
    PrepSpec,
    load_candidate_set,
    make_lr,
    make_synthetic_candidates,
    make_telephoto,
    prepare_dataset,
    read_manifest,
    write_manifest,
)
from .fusion import (
    BinaryMask,
    CandidateSet,
    FusionConfig,
    FusionReport,
    WeightMask,
    adaptive_weight_mask,
    binary_masks,
    combined_fuse,
    fuse,
    global_weights,
    masked_fuse,
    naive_fuse,
)
from .image import (
    DimensionError,
    ImagePlane,
    RgbImage,
    YcbcrImage,
    center_crop,
    crop,
    load_png,
    luma,
    rgb_to_ycbcr,
    save_gray_png,
    save_png,
    ycbcr_to_rgb,
)
from .metrics import MetricResult, evaluate, psnr_y, ssim_y
from .resample import bicubic_resample, resample_by_factor, resample_rgb, scaled_dims
from .sweep import (
    SweepRecord,
    SweepSpec,
    mean_records,
    sweep_beta,
    sweep_beta_g,
    sweep_fuse_count,
    sweep_heatmap,
    write_csv,
)

__version__ = "0.1.0"

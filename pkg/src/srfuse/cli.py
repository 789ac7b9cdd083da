"""Command-line entry point: fuse candidate sets, prepare datasets, run
parameter sweeps, and compute metrics.

Reports go to stdout as key=value lines; diagnostics go to stderr. Exit
codes: 0 success, 1 bad flags or values, 2 I/O or manifest errors, 3
dimension errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .dataset import (
    DISTORTION_KINDS,
    DistortionSpec,
    ManifestError,
    prepare_dataset,
)
from .fusion import CROP_POLICIES, CandidateSet, FusionConfig, fuse, naive_fuse
from .image import DimensionError, load_png, save_gray_png, save_png
from .metrics import evaluate
from .sweep import (
    DEFAULT_BETA_G_GRID,
    DEFAULT_BETA_GRID,
    SweepSpec,
    sweep_beta,
    sweep_beta_g,
    sweep_fuse_count,
    sweep_heatmap,
    write_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DIMENSION = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the CLI contract
    # reserves 2 for I/O problems
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _counts(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fuse = sub.add_parser("fuse", help="fuse SR candidates of one LR input")
    p_fuse.add_argument("candidates", nargs="+", metavar="CANDIDATE",
                        help="SR candidate PNGs, most relevant reference first")
    p_fuse.add_argument("--lr", required=True, help="low-resolution input PNG")
    p_fuse.add_argument("--out", required=True, help="fused output PNG")
    p_fuse.add_argument("--beta", type=float, default=300.0,
                        help="per-pixel discrepancy penalty (default 300)")
    p_fuse.add_argument("--beta-g", type=float, default=2.0,
                        help="global reference-quality exponent scale (default 2)")
    p_fuse.add_argument("--scale", type=int, default=4,
                        help="LR-to-SR integer scale factor (default 4)")
    p_fuse.add_argument("--naive", action="store_true",
                        help="plain per-pixel mean instead of weighted fusion")
    p_fuse.add_argument("--export-masks", metavar="DIR",
                        help="write weight and binary masks as grayscale PNGs")
    p_fuse.add_argument("--crop-policy", choices=CROP_POLICIES, default="center",
                        help="how to harmonize mismatched candidate dimensions")
    p_fuse.add_argument("--threads", type=int, default=1,
                        help="worker-thread cap (results are thread-count independent)")
    p_fuse.set_defaults(func=cmd_fuse)

    p_prep = sub.add_parser("prep", help="build an evaluation dataset from HR PNGs")
    p_prep.add_argument("--hr-dir", required=True, help="directory of HR ground-truth PNGs")
    p_prep.add_argument("--out", required=True, help="output dataset directory")
    p_prep.add_argument("--scale", type=int, default=4,
                        help="bicubic downsampling factor (default 4)")
    p_prep.add_argument("--count", type=int, default=3,
                        help="synthetic SR candidates per image (default 3)")
    p_prep.add_argument("--distortion", choices=DISTORTION_KINDS, default="noise",
                        help="synthetic candidate corruption (default noise)")
    p_prep.add_argument("--strength", type=float, default=24.0,
                        help="base corruption strength (default 24)")
    p_prep.add_argument("--ramp", type=float, default=1.0,
                        help="per-candidate strength growth (default 1)")
    p_prep.add_argument("--seed", type=int, default=0,
                        help="seed for all randomness (default 0)")
    p_prep.add_argument("--refs", type=int, default=0,
                        help="telephoto reference crops per image, up to 5 (default 0)")
    p_prep.set_defaults(func=cmd_prep)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep over a manifest")
    p_sweep.add_argument("--manifest", required=True, help="dataset manifest file")
    p_sweep.add_argument("--out", required=True, help="output CSV file")
    p_sweep.add_argument("--mode", choices=("beta", "beta-g", "heatmap", "count"),
                         default="heatmap", help="which sweep to run (default heatmap)")
    p_sweep.add_argument("--beta-grid", type=_grid,
                         default=DEFAULT_BETA_GRID, metavar="B0,B1,...",
                         help="comma-separated beta grid")
    p_sweep.add_argument("--beta-g-grid", type=_grid,
                         default=DEFAULT_BETA_G_GRID, metavar="G0,G1,...",
                         help="comma-separated beta_g grid")
    p_sweep.add_argument("--counts", type=_counts, default=(), metavar="K0,K1,...",
                         help="fusion counts for --mode count (default 1..N)")
    p_sweep.add_argument("--beta", type=float, default=300.0,
                         help="fixed beta for --mode count (default 300)")
    p_sweep.add_argument("--beta-g", type=float, default=0.0,
                         help="fixed beta_g for --mode count (default 0; nonzero "
                              "values select the largest-area candidate outright "
                              "since mask areas are raw pixel counts)")
    p_sweep.add_argument("--scale", type=int, default=4,
                         help="LR-to-SR integer scale factor (default 4)")
    p_sweep.add_argument("--crop-policy", choices=CROP_POLICIES, default="center")
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_metric = sub.add_parser("metric", help="PSNR_Y and SSIM between two PNGs")
    p_metric.add_argument("a", help="first image")
    p_metric.add_argument("b", help="second image")
    p_metric.set_defaults(func=cmd_metric)

    return parser


def cmd_fuse(args) -> int:
    lr = load_png(args.lr)
    candidates = [load_png(p) for p in args.candidates]
    cset = CandidateSet.from_images(lr, candidates, args.scale, args.crop_policy)
    print(f"candidates={cset.count}")
    if args.naive:
        print("mode=naive")
        fused = naive_fuse(cset)
    else:
        config = FusionConfig(beta=args.beta, beta_g=args.beta_g, scale=args.scale,
                              crop_policy=args.crop_policy)
        print("mode=weighted")
        print(f"beta={args.beta!r}")
        print(f"beta_g={args.beta_g!r}")
        report = fuse(cset, config, export_masks=bool(args.export_masks),
                      threads=max(1, args.threads))
        fused = report.fused
        for i, (w, area) in enumerate(zip(report.global_weights, report.mask_areas), 1):
            print(f"global_weight[{i}]={w!r}")
            print(f"mask_area[{i}]={area!r}")
        if args.export_masks:
            mask_dir = Path(args.export_masks)
            mask_dir.mkdir(parents=True, exist_ok=True)
            for i, (wm, bm) in enumerate(zip(report.weight_masks, report.binary_masks), 1):
                save_gray_png(wm.weights, mask_dir / f"weight_mask_{i}.png", scale=255.0)
                save_gray_png(bm.mask, mask_dir / f"binary_mask_{i}.png", scale=255.0)
            print(f"masks_dir={mask_dir}")
    save_png(fused, args.out)
    print(f"fused={args.out}")
    return EXIT_OK


def cmd_prep(args) -> int:
    distortion = DistortionSpec(kind=args.distortion, strength=args.strength,
                                ramp=args.ramp, seed=args.seed)
    entries = prepare_dataset(args.hr_dir, args.out, scale=args.scale,
                              count=args.count, distortion=distortion, refs=args.refs)
    print(f"sets={len(entries)}")
    print(f"manifest={Path(args.out) / 'manifest.txt'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        manifest=Path(args.manifest),
        beta_grid=args.beta_grid,
        beta_g_grid=args.beta_g_grid,
        fuse_counts=args.counts,
        scale=args.scale,
        fixed_beta=args.beta,
        fixed_beta_g=args.beta_g,
        crop_policy=args.crop_policy,
        threads=max(1, args.threads),
    )
    run = {
        "beta": sweep_beta,
        "beta-g": sweep_beta_g,
        "heatmap": sweep_heatmap,
        "count": sweep_fuse_count,
    }[args.mode]
    records = run(spec)
    write_csv(records, args.out)
    print(f"records={len(records)}")
    print(f"csv={args.out}")
    return EXIT_OK


def cmd_metric(args) -> int:
    result = evaluate(load_png(args.a), load_png(args.b))
    print(f"psnr_y={result.psnr_y!r}")
    print(f"ssim={result.ssim!r}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="srfuse: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        print(f"srfuse: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"srfuse: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DimensionError as exc:
        print(f"srfuse: error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except ValueError as exc:
        print(f"srfuse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Render a scene file in one of four modes, or compare two images:

    hybridblur --scene scene.json --mode hybrid --out frame.png
    hybridblur --compare frame.png reference.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .imgio import read_image, write_png, write_ppm
from .metrics import compare_images
from .pipeline import MODES, ConfigError, RunConfig, dump_intermediates, run_mode
from .scenefile import SceneError, load_scene, load_scene_defaults


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hybridblur",
        description="Hybrid motion blur renderer with a distributed ray "
                    "tracing reference and image quality metrics.",
    )
    p.add_argument("--scene", help="scene description file (JSON)")
    p.add_argument("--mode", choices=MODES, default="hybrid",
                   help="render mode (default: hybrid)")
    p.add_argument("--out", default="out.png",
                   help="output image path; .png or .ppm (default: out.png)")
    p.add_argument("--tile-size", type=int, default=40, metavar="M",
                   help="tile length in pixels (default: 40)")
    p.add_argument("--neighborhood", type=int, default=3, metavar="N",
                   help="dilation window in tiles, odd (default: 3)")
    p.add_argument("--samples", type=int, default=15,
                   help="gather samples per pixel (default: 15)")
    p.add_argument("--exposure", type=float, default=None,
                   help="shutter-open seconds; overrides the scene file")
    p.add_argument("--soft-z", type=float, default=None, metavar="METERS",
                   help="foreground/background depth tolerance "
                        "(default: scene file value or 0.03)")
    p.add_argument("--edge-threshold", type=float, default=None, metavar="E",
                   help="edge mask threshold in (0, 1) "
                        "(default: scene file value or 0.9)")
    p.add_argument("--max-recursion", type=int, default=5,
                   help="reveal recursion limit (default: 5)")
    p.add_argument("--luminance-eps", type=float, default=0.02,
                   help="luminance difference that separates objects (default: 0.02)")
    p.add_argument("--fg-boost", type=float, default=30.0,
                   help="foreground weight magnification at depth edges (default: 30)")
    p.add_argument("--mask-bg-factor", type=float, default=3.0,
                   help="background weight magnification inside the ray mask (default: 3)")
    p.add_argument("--rpp", type=int, default=200,
                   help="ground-truth rays per pixel (default: 200)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for all stochastic sampling (default: 0)")
    p.add_argument("--jitter", action="store_true",
                   help="jitter gather sample positions (seeded)")
    p.add_argument("--sample-direction", choices=("trailing", "leading"),
                   default="leading",
                   help="sample along +v (leading, default) or against it (trailing)")
    p.add_argument("--disable-reveal", action="store_true",
                   help="skip the reveal stage; hybrid degenerates to postprocess")
    p.add_argument("--dump-intermediate", action="store_true",
                   help="write every intermediate buffer next to the output")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the ground-truth renderer (default: 1)")
    p.add_argument("--compare", nargs=2, metavar=("A", "B"),
                   help="print PSNR/SSIM between two images and exit")
    p.add_argument("--quantize-metrics", action="store_true",
                   help="round images through 8 bits before comparing")
    return p


def _write_output(path: str, image) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        write_ppm(path, image)
    else:
        write_png(path, image)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.compare:
        try:
            a = read_image(args.compare[0])
            b = read_image(args.compare[1])
            report = compare_images(a, b, quantize=args.quantize_metrics)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"PSNR={report.psnr:.4f} dB SSIM={report.ssim:.6f}")
        return 0

    if not args.scene:
        print("error: --scene is required unless --compare is used",
              file=sys.stderr)
        return 2

    config = RunConfig(
        scene_path=args.scene,
        mode=args.mode,
        out_path=args.out,
        tile_m=args.tile_size,
        tile_n=args.neighborhood,
        samples=args.samples,
        exposure=args.exposure,
        soft_z=args.soft_z,
        edge_threshold=args.edge_threshold,
        max_recursion=args.max_recursion,
        luminance_eps=args.luminance_eps,
        fg_boost=args.fg_boost,
        mask_bg_factor=args.mask_bg_factor,
        rpp=args.rpp,
        seed=args.seed,
        jitter=args.jitter,
        sample_direction=args.sample_direction,
        reveal_enabled=not args.disable_reveal,
        dump_intermediate=args.dump_intermediate,
        threads=args.threads,
    )

    try:
        scene = load_scene(config.scene_path)
        defaults = load_scene_defaults(config.scene_path)
        result = run_mode(scene, config, defaults)
    except (SceneError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    _write_output(config.out_path, result.image)
    if config.dump_intermediate:
        folder = dump_intermediates(result, config.out_path)
        print(f"intermediates: {folder}")

    for name, ms in result.timings:
        print(f"{name}: {ms:.2f} ms")
    print(f"wrote {config.out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

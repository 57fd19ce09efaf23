"""Pass orchestration: buffers, mask, reveal, tile-dilate, blur, composite.

Modes:
  raster       sharp deferred-shading color
  postprocess  gather-filter blur on the raster buffers only
  hybrid       full pipeline with ray-revealed background compositing
  groundtruth  distributed ray tracing reference
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .blur import BlurOutput, FilterParams, composite, gather_blur
from .gbuffer import FrameBuffers, render_gbuffer
from .groundtruth import OracleParams, render_ground_truth
from .imgio import write_pgm, write_plane
from .mask import MaskBuffers, RayMaskParams, build_ray_mask
from .reveal import RevealBuffers, RevealParams, merged_background, reveal_pass
from .scene import Scene
from .tiles import TileParams, dominant_velocity_grid

MODES = ("raster", "postprocess", "hybrid", "groundtruth")


class ConfigError(ValueError):
    """Invalid parameter combination."""


@dataclass
class PipelineResult:
    image: np.ndarray  # (H, W, 3)
    timings: list  # ordered (pass name, milliseconds)
    buffers: FrameBuffers | None = None
    masks: MaskBuffers | None = None
    reveal: RevealBuffers | None = None
    raster_blur: BlurOutput | None = None
    reveal_blur: BlurOutput | None = None
    tiles_raster: np.ndarray | None = None
    tiles_reveal: np.ndarray | None = None


def _check_tiles(scene: Scene, tile: TileParams):
    cam = scene.camera
    if cam.width % tile.m or cam.height % tile.m:
        raise ConfigError(
            f"resolution {cam.width}x{cam.height} is not divisible by tile length {tile.m}"
        )


class _Clock:
    def __init__(self):
        self.timings = []
        self._t0 = time.perf_counter()
        self._total0 = self._t0

    def lap(self, name):
        now = time.perf_counter()
        self.timings.append((name, (now - self._t0) * 1000.0))
        self._t0 = now

    def done(self):
        self.timings.append(("Total", (time.perf_counter() - self._total0) * 1000.0))
        return self.timings


def run_raster(scene: Scene) -> PipelineResult:
    clock = _Clock()
    fb = render_gbuffer(scene)
    clock.lap("G-Buffer")
    return PipelineResult(image=fb.color.copy(), timings=clock.done(), buffers=fb)


def run_postprocess(scene: Scene, filter_params: FilterParams) -> PipelineResult:
    _check_tiles(scene, filter_params.tile)
    clock = _Clock()
    fb = render_gbuffer(scene)
    clock.lap("G-Buffer")
    tiles = dominant_velocity_grid(fb.velocity, filter_params.tile)
    clock.lap("Tile-Dilate")
    blur = gather_blur(fb, tiles, filter_params)
    clock.lap("PP-Composite")
    return PipelineResult(
        image=blur.color.copy(), timings=clock.done(), buffers=fb,
        raster_blur=blur, tiles_raster=tiles,
    )


def run_hybrid(scene: Scene, mask_params: RayMaskParams, reveal_params: RevealParams,
               filter_params: FilterParams, reveal_enabled: bool = True) -> PipelineResult:
    _check_tiles(scene, filter_params.tile)
    h, w = scene.camera.height, scene.camera.width
    clock = _Clock()
    fb = render_gbuffer(scene)
    clock.lap("G-Buffer")

    if reveal_enabled:
        masks = build_ray_mask(fb, mask_params)
    else:
        empty = np.zeros((h, w), dtype=bool)
        masks = MaskBuffers(candidates=empty, edge_mask=empty, ray_mask=empty)
    clock.lap("Ray Mask")

    rv = reveal_pass(scene, fb, masks.ray_mask, reveal_params)
    clock.lap("Ray Trace")

    background = merged_background(fb, rv)
    tiles_raster = dominant_velocity_grid(fb.velocity, filter_params.tile)
    tiles_reveal = dominant_velocity_grid(background.velocity, filter_params.tile)
    clock.lap("Tile-Dilate")

    pp_raster = gather_blur(fb, tiles_raster, filter_params, mask=masks.ray_mask)
    pp_reveal = gather_blur(background, tiles_reveal, filter_params)
    image = composite(pp_raster, pp_reveal, masks.ray_mask, filter_params,
                      reveal_valid=rv.valid)
    clock.lap("PP-Composite")

    return PipelineResult(
        image=image, timings=clock.done(), buffers=fb, masks=masks, reveal=rv,
        raster_blur=pp_raster, reveal_blur=pp_reveal,
        tiles_raster=tiles_raster, tiles_reveal=tiles_reveal,
    )


def run_groundtruth(scene: Scene, oracle_params: OracleParams, threads: int = 1) -> PipelineResult:
    clock = _Clock()
    image = render_ground_truth(scene, oracle_params, threads=threads)
    clock.lap("Ray Trace")
    return PipelineResult(image=image, timings=clock.done())


@dataclass
class RunConfig:
    """Everything one render needs; CLI flags map onto these fields."""

    scene_path: str
    mode: str = "hybrid"
    out_path: str = "out.png"
    tile_m: int = 40
    tile_n: int = 3
    samples: int = 15
    exposure: float | None = None  # overrides the scene file when set
    soft_z: float | None = None
    edge_threshold: float | None = None
    max_recursion: int = 5
    luminance_eps: float = 0.02
    fg_boost: float = 30.0
    mask_bg_factor: float = 3.0
    rpp: int = 200
    seed: int = 0
    jitter: bool = False
    sample_direction: str = "leading"
    reveal_enabled: bool = True
    dump_intermediate: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def resolve_params(config: RunConfig, file_defaults: dict | None = None):
    """Merge CLI overrides, per-scene suggestions, and global defaults."""
    defaults = file_defaults or {}
    soft_z = config.soft_z
    if soft_z is None:
        soft_z = defaults.get("soft_z_extent", 0.03)
    edge = config.edge_threshold
    if edge is None:
        edge = defaults.get("edge_threshold", 0.9)
    try:
        tile = TileParams(m=config.tile_m, n=config.tile_n)
        mask = RayMaskParams(e=edge, soft_z_extent=soft_z,
                             range_samples=config.samples)
        rev = RevealParams(max_recursion=config.max_recursion,
                           luminance_epsilon=config.luminance_eps)
        filt = FilterParams(sample_count=config.samples, soft_z_extent=soft_z,
                            fg_edge_boost=config.fg_boost,
                            mask_bg_factor=config.mask_bg_factor, tile=tile,
                            sample_direction=config.sample_direction,
                            jitter=config.jitter, jitter_seed=config.seed)
        oracle = OracleParams(rpp=config.rpp, seed=config.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return mask, rev, filt, oracle


def run_mode(scene: Scene, config: RunConfig, file_defaults: dict | None = None) -> PipelineResult:
    mask_params, reveal_params, filter_params, oracle_params = resolve_params(
        config, file_defaults
    )
    if config.exposure is not None:
        if config.exposure <= 0.0:
            raise ConfigError("exposure must be positive")
        scene = replace(scene, exposure=float(config.exposure))
    if config.mode == "raster":
        return run_raster(scene)
    if config.mode == "postprocess":
        return run_postprocess(scene, filter_params)
    if config.mode == "hybrid":
        return run_hybrid(scene, mask_params, reveal_params, filter_params,
                          reveal_enabled=config.reveal_enabled)
    return run_groundtruth(scene, oracle_params, threads=config.threads)


def dump_intermediates(result: PipelineResult, out_path) -> Path:
    """Write every available intermediate next to the output image."""
    out = Path(out_path)
    folder = out.parent / (out.stem + "_buffers")
    folder.mkdir(parents=True, exist_ok=True)
    fb = result.buffers
    if fb is not None:
        write_plane(folder / "color.hmbp", fb.color)
        write_plane(folder / "depth.hmbp", fb.depth)
        write_plane(folder / "velocity.hmbp", fb.velocity)
        write_plane(folder / "normal.hmbp", fb.normal)
        write_plane(folder / "mesh_id.hmbp", fb.mesh_id.astype(np.float32))
    if result.masks is not None:
        write_pgm(folder / "candidates.pgm", result.masks.candidates)
        write_pgm(folder / "edge_mask.pgm", result.masks.edge_mask)
        write_pgm(folder / "ray_mask.pgm", result.masks.ray_mask)
    if result.reveal is not None:
        write_plane(folder / "reveal_color.hmbp", result.reveal.color)
        write_plane(folder / "reveal_depth.hmbp", result.reveal.depth)
        write_plane(folder / "reveal_velocity.hmbp", result.reveal.velocity)
        write_pgm(folder / "reveal_valid.pgm", result.reveal.valid)
    if result.tiles_raster is not None:
        write_plane(folder / "tiles_raster.hmbp", result.tiles_raster)
    if result.tiles_reveal is not None:
        write_plane(folder / "tiles_reveal.hmbp", result.tiles_reveal)
    if result.raster_blur is not None:
        write_plane(folder / "blur_raster.hmbp", result.raster_blur.color)
    if result.reveal_blur is not None:
        write_plane(folder / "blur_reveal.hmbp", result.reveal_blur.color)
    return folder

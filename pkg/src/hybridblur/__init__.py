"""Hybrid motion blur rendering on the CPU.

A deferred-shading G-buffer is blurred by a velocity-driven gather filter;
inside a Sobel-derived ray mask, recursively advanced rays reveal the
occluded background, which is blurred and composited back for accurate
partial-occlusion semi-transparency. A distributed ray tracing renderer
provides the reference, with PSNR/SSIM for comparisons.
"""

from .blur import (
    BlurOutput,
    FilterParams,
    WeightTerms,
    composite,
    cylinder,
    gather_blur,
    sample_weight,
    saturate,
    smoothstep,
    weight_terms,
)
from .gbuffer import (
    FrameBuffers,
    per_exposure_velocity,
    render_gbuffer,
    screen_motion_vector,
)
from .groundtruth import GroundTruthStats, OracleParams, render_ground_truth
from .intersect import (
    BatchHits,
    Bvh,
    build_bvh,
    intersect,
    intersect_batch,
    intersect_brute_force,
)
from .mask import (
    MaskBuffers,
    RayMaskParams,
    build_edge_mask,
    build_ray_mask,
    candidate_filter,
    edge_strength,
    range_check,
)
from .metrics import MetricReport, compare_images, psnr, ssim
from .pipeline import (
    ConfigError,
    PipelineResult,
    RunConfig,
    run_groundtruth,
    run_hybrid,
    run_mode,
    run_postprocess,
    run_raster,
)
from .reveal import (
    GatherInput,
    RevealBuffers,
    RevealParams,
    RevealRecord,
    merged_background,
    reveal_pass,
    reveal_pixel,
)
from .rng import hash_uniform
from .scene import (
    FAR_DEPTH,
    MISS_ID,
    Camera,
    HitRecord,
    Light,
    MeshInstance,
    Scene,
    luminance,
    shade,
    shade_surface,
)
from .scenefile import (
    SceneError,
    bundled_scene_names,
    bundled_scene_path,
    load_scene,
    load_scene_defaults,
    parse_scene,
)
from .tiles import TileParams, clamp_velocity, dominant_velocity_grid, neighbor_max, tile_max

__version__ = "0.1.0"

"""Distributed ray tracing reference: average time-jittered primary-ray
shading across the exposure interval.

Each pixel draws one stratified tau sample per stratum, tau = (k + u) / rpp,
with the jitter u coming from a counter-based hash of (x, y, k, seed).
Renders are bit-reproducible for a fixed seed and thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .intersect import intersect_batch
from .rng import hash_uniform
from .scene import Scene, shade_surface


@dataclass
class OracleParams:
    rpp: int = 200  # rays (time samples) per pixel
    seed: int = 0

    def __post_init__(self):
        if self.rpp < 1:
            raise ValueError("rpp must be >= 1")


@dataclass
class GroundTruthStats:
    """Per-pixel sample statistics averaged over the image.

    mean_sample_variance is the spread of the rpp shaded samples at a pixel
    (channel-averaged population variance); mean_estimate_variance divides by
    rpp, i.e. the classic variance bound of the per-pixel mean estimate.
    """

    mean_sample_variance: float
    mean_estimate_variance: float


def _shade_stratum(scene, origins, dirs, xs, ys, k, params, tau_override):
    if tau_override is None:
        u = hash_uniform(xs, ys, k, params.seed)
        tau = (k + u) / params.rpp
    else:
        tau = np.full(xs.shape, float(tau_override))
    hits = intersect_batch(scene, origins, dirs, tau=tau)
    color = np.broadcast_to(scene.background_color, (dirs.shape[0], 3)).copy()
    if np.any(hits.hit):
        shaded = shade_surface(
            hits.normal, hits.point, hits.albedo, scene.lights, scene.ambient
        )
        color = np.where(hits.hit[:, None], shaded, color)
    return color


def render_ground_truth(scene: Scene, params: OracleParams,
                        return_stats: bool = False, tau_override: float | None = None,
                        threads: int = 1):
    """Render the motion-blur reference image, shape (H, W, 3) in [0, 1].

    tau_override freezes every sample at one exposure time (diagnostics).
    With return_stats=True, also returns GroundTruthStats.
    """
    cam = scene.camera
    h, w = cam.height, cam.width
    dirs = cam.ray_directions().reshape(-1, 3)
    origins = np.broadcast_to(cam.position, (dirs.shape[0], 3))
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    xs = xs.reshape(-1)
    ys = ys.reshape(-1)

    total = np.zeros((dirs.shape[0], 3))
    total_sq = np.zeros((dirs.shape[0], 3))

    if threads > 1 and params.rpp > 1:
        def run(k):
            return _shade_stratum(scene, origins, dirs, xs, ys, k, params, tau_override)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            # accumulate in stratum order so the reduction is deterministic
            for color in pool.map(run, range(params.rpp)):
                total += color
                total_sq += color * color
    else:
        for k in range(params.rpp):
            color = _shade_stratum(scene, origins, dirs, xs, ys, k, params, tau_override)
            total += color
            total_sq += color * color

    mean = total / params.rpp
    image = np.clip(mean, 0.0, 1.0).reshape(h, w, 3)
    if not return_stats:
        return image
    variance = np.maximum(total_sq / params.rpp - mean * mean, 0.0)
    sample_var = float(variance.mean())
    return image, GroundTruthStats(
        mean_sample_variance=sample_var,
        mean_estimate_variance=sample_var / params.rpp,
    )

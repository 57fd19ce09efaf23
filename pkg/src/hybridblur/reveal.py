"""Ray reveal: recover the background occluded by moving foreground objects.

For each masked pixel the primary ray is re-cast and then respawned past its
first hit until a surface with a different shaded luminance turns up; that
hit's color, camera-space depth and screen velocity become the revealed
background record. A ray escaping the scene reveals the environment color
(a legitimate "nothing behind" background); running out of recursions leaves
the record invalid so the compositor can fall back to the neighbor
approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gbuffer import FrameBuffers, per_exposure_velocity, screen_motion_vector
from .intersect import Bvh, build_bvh, intersect
from .scene import Camera, Scene, luminance, shade


@dataclass
class RevealParams:
    max_recursion: int = 5
    luminance_epsilon: float = 0.02
    advance_epsilon: float = 1.0e-4  # meters; escapes self-intersection

    def __post_init__(self):
        if self.max_recursion < 1:
            raise ValueError("max_recursion must be >= 1")
        if self.luminance_epsilon < 0.0:
            raise ValueError("luminance_epsilon must be >= 0")
        if self.advance_epsilon <= 0.0:
            raise ValueError("advance_epsilon must be positive")


@dataclass
class RevealRecord:
    color: np.ndarray  # (3,)
    depth: float  # camera-space meters, +inf for escaped rays
    velocity: np.ndarray  # (2,) pixels per exposure
    valid: bool


@dataclass
class RevealBuffers:
    color: np.ndarray  # (H, W, 3)
    depth: np.ndarray  # (H, W)
    velocity: np.ndarray  # (H, W, 2)
    valid: np.ndarray  # (H, W) bool
    traced: int  # recursive ray chains started (= mask population)


def _hit_velocity(scene: Scene, camera: Camera, hit) -> np.ndarray:
    mesh = scene.mesh_by_id(hit.mesh_id)
    motion, ok = screen_motion_vector(
        hit.point - mesh.frame_displacement, hit.point, camera
    )
    if not ok:
        return np.zeros(2)
    return per_exposure_velocity(motion, scene.frame_rate, scene.exposure)


def reveal_pixel(scene: Scene, bvh: Bvh, camera: Camera, pixel,
                 params: RevealParams) -> RevealRecord:
    """Reveal the background behind one masked pixel.

    The pixel must have a G-buffer hit; the first intersection along its
    primary ray reproduces it, then rays respawn along the same direction
    until the shaded luminance differs from the first hit's.
    """
    x, y = pixel
    direction = camera.ray_direction(x, y)
    first = intersect(bvh, camera.position, direction)
    if first is None:
        return RevealRecord(np.zeros(3), np.inf, np.zeros(2), False)
    lum0 = float(luminance(shade(first, scene.lights, scene)))

    origin = first.point + params.advance_epsilon * direction
    for _ in range(params.max_recursion):
        nxt = intersect(bvh, origin, direction)
        if nxt is None:
            # nothing behind: the environment is the revealed background
            return RevealRecord(scene.background_color.copy(), np.inf, np.zeros(2), True)
        color = shade(nxt, scene.lights, scene)
        if abs(float(luminance(color)) - lum0) > params.luminance_epsilon:
            depth = float(camera.depth_of(nxt.point))
            return RevealRecord(color, depth, _hit_velocity(scene, camera, nxt), True)
        origin = nxt.point + params.advance_epsilon * direction
    return RevealRecord(np.zeros(3), np.inf, np.zeros(2), False)


def reveal_pass(scene: Scene, buffers: FrameBuffers, mask,
                params: RevealParams, bvh: Bvh | None = None) -> RevealBuffers:
    """Apply reveal_pixel to exactly the masked pixels; all others invalid."""
    h, w = buffers.height, buffers.width
    out = RevealBuffers(
        color=np.zeros((h, w, 3)),
        depth=np.full((h, w), np.inf),
        velocity=np.zeros((h, w, 2)),
        valid=np.zeros((h, w), dtype=bool),
        traced=0,
    )
    mask = np.asarray(mask, dtype=bool)
    if not np.any(mask):
        return out
    if bvh is None:
        bvh = build_bvh(scene, 1.0)
    camera = scene.camera
    ys, xs = np.nonzero(mask)
    for y, x in zip(ys.tolist(), xs.tolist()):
        record = reveal_pixel(scene, bvh, camera, (x, y), params)
        out.traced += 1
        out.color[y, x] = record.color
        out.depth[y, x] = record.depth
        out.velocity[y, x] = record.velocity
        out.valid[y, x] = record.valid
    return out


@dataclass
class GatherInput:
    """Minimal plane bundle the gather filter accepts."""

    color: np.ndarray
    depth: np.ndarray
    velocity: np.ndarray


def merged_background(buffers: FrameBuffers, reveal: RevealBuffers) -> GatherInput:
    """Reveal planes with raster fallbacks where no valid record exists.

    Color and depth fall back to the raster G-buffer (the neighbor
    approximation the compositor also uses); velocity falls back to zero so
    untraced pixels do not smear the revealed background with foreground
    motion.
    """
    valid = reveal.valid
    color = np.where(valid[..., None], reveal.color, buffers.color)
    depth = np.where(valid, reveal.depth, buffers.depth)
    velocity = np.where(valid[..., None], reveal.velocity, 0.0)
    return GatherInput(color=color, depth=depth, velocity=velocity)

"""Deferred-shading buffers filled by primary-ray visibility.

One pixel-center ray per pixel at the end of the exposure (tau = 1). Misses
carry the scene background color, an infinite depth sentinel, zero velocity
and mesh_id = MISS_ID.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intersect import intersect_batch
from .scene import MISS_ID, Camera, Scene, shade_surface

_BEHIND_EPS = 1.0e-9


@dataclass
class FrameBuffers:
    """Per-pixel planes, all (height, width[, channels])."""

    color: np.ndarray  # (H, W, 3) in [0, 1]
    depth: np.ndarray  # (H, W) camera-space meters, +inf on miss
    velocity: np.ndarray  # (H, W, 2) pixels per exposure
    normal: np.ndarray  # (H, W, 3) unit vectors, zero on miss
    mesh_id: np.ndarray  # (H, W) int32, MISS_ID on miss
    background: np.ndarray  # (3,)

    def __post_init__(self):
        hw = self.depth.shape
        if (self.color.shape != hw + (3,) or self.velocity.shape != hw + (2,)
                or self.normal.shape != hw + (3,) or self.mesh_id.shape != hw):
            raise ValueError("frame buffer planes disagree in resolution")

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.velocity, axis=-1)


def per_exposure_velocity(motion_px_per_frame, frame_rate: float, exposure: float):
    """Scale an inter-frame motion vector to pixels per exposure.

    The motion vector is treated as constant throughout the shutter-open
    interval, so the per-exposure displacement is motion * frame_rate *
    exposure.
    """
    if frame_rate <= 0.0:
        raise ValueError("frame_rate must be positive")
    if exposure <= 0.0:
        raise ValueError("exposure must be positive")
    return np.asarray(motion_px_per_frame, dtype=np.float64) * (frame_rate * exposure)


def screen_motion_vector(world_prev, world_curr, camera: Camera):
    """Pixel-space motion of a world point over one frame.

    Returns (vector, valid). Points at or behind the camera plane cannot be
    projected; those yield a zero vector with valid=False.
    """
    px0, py0, z0 = camera.project(np.asarray(world_prev, dtype=np.float64))
    px1, py1, z1 = camera.project(np.asarray(world_curr, dtype=np.float64))
    if z0 <= _BEHIND_EPS or z1 <= _BEHIND_EPS:
        return np.zeros(2), False
    return np.array([px1 - px0, py1 - py0]), True


def render_gbuffer(scene: Scene) -> FrameBuffers:
    cam = scene.camera
    h, w = cam.height, cam.width
    dirs = cam.ray_directions().reshape(-1, 3)
    origins = np.broadcast_to(cam.position, (dirs.shape[0], 3))
    hits = intersect_batch(scene, origins, dirs, tau=1.0)

    color = np.broadcast_to(scene.background_color, (dirs.shape[0], 3)).copy()
    if np.any(hits.hit):
        shaded = shade_surface(
            hits.normal, hits.point, hits.albedo, scene.lights, scene.ambient
        )
        color = np.where(hits.hit[:, None], shaded, color)

    depth = np.where(hits.hit, cam.depth_of(hits.point), np.inf)
    velocity = _hit_velocities(scene, hits)
    mesh_id = hits.mesh_id.astype(np.int32)
    normal = np.where(hits.hit[:, None], hits.normal, 0.0)

    return FrameBuffers(
        color=color.reshape(h, w, 3),
        depth=depth.reshape(h, w),
        velocity=velocity.reshape(h, w, 2),
        normal=normal.reshape(h, w, 3),
        mesh_id=mesh_id.reshape(h, w),
        background=scene.background_color.copy(),
    )


def _hit_velocities(scene: Scene, hits) -> np.ndarray:
    """Per-ray screen velocity in pixels per exposure; zero for misses and
    for points whose previous position falls behind the camera."""
    cam = scene.camera
    n = hits.t.shape[0]
    vel = np.zeros((n, 2))
    if not scene.meshes or not np.any(hits.hit):
        return vel
    displacement = np.array(
        [m.frame_displacement for m in scene.meshes], dtype=np.float64
    )
    if not np.any(displacement):
        return vel
    idx = np.where(hits.hit, hits.mesh_index, 0)
    disp = np.where(hits.hit[:, None], displacement[idx], 0.0)
    prev = hits.point - disp
    px1, py1, z1 = cam.project(hits.point)
    px0, py0, z0 = cam.project(prev)
    ok = hits.hit & (z0 > _BEHIND_EPS) & (z1 > _BEHIND_EPS)
    scale = scene.frames_per_exposure
    vel[:, 0] = np.where(ok, (px1 - px0) * scale, 0.0)
    vel[:, 1] = np.where(ok, (py1 - py0) * scale, 0.0)
    return vel

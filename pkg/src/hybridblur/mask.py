"""Ray mask: selects inner-blur pixels worth revealing with rays.

Moving pixels whose one-exposure-advanced position lands on a different,
sufficiently deeper surface are candidates. Candidates near a geometry edge
(5x5 Sobel over depth and normals) form the edge mask, which a velocity-
directed range check then spreads to every pixel whose motion crosses it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gbuffer import FrameBuffers
from .scene import FAR_DEPTH, MISS_ID

_SOBEL_SMOOTH = np.array([1.0, 4.0, 6.0, 4.0, 1.0])
_SOBEL_DERIV = np.array([-1.0, -2.0, 0.0, 2.0, 1.0])
SOBEL_X = np.outer(_SOBEL_SMOOTH, _SOBEL_DERIV)
SOBEL_Y = SOBEL_X.T


@dataclass
class RayMaskParams:
    e: float = 0.9  # edge threshold
    soft_z_extent: float = 0.03  # meters
    range_samples: int = 15

    def __post_init__(self):
        if not 0.0 < self.e < 1.0:
            raise ValueError("edge threshold e must be in (0, 1)")
        if self.soft_z_extent <= 0.0:
            raise ValueError("soft_z_extent must be positive")
        if self.range_samples < 1:
            raise ValueError("range_samples must be >= 1")


@dataclass
class MaskBuffers:
    candidates: np.ndarray  # bool (H, W)
    edge_mask: np.ndarray  # bool (H, W)
    ray_mask: np.ndarray  # bool (H, W)


def _advance_coords(h, w, velocity):
    """Nearest-pixel coordinates one per-exposure displacement ahead,
    clamped to the image bounds."""
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    nx = np.clip(np.rint(xs + velocity[..., 0]), 0, w - 1).astype(np.intp)
    ny = np.clip(np.rint(ys + velocity[..., 1]), 0, h - 1).astype(np.intp)
    return ny, nx


def candidate_filter(buffers: FrameBuffers, params: RayMaskParams) -> np.ndarray:
    """Occlusion candidates: moving pixels whose advanced position shows a
    different mesh lying deeper by more than soft_z_extent."""
    h, w = buffers.height, buffers.width
    moving = (buffers.speed > 0.0) & (buffers.mesh_id != MISS_ID)
    ny, nx = _advance_coords(h, w, buffers.velocity)
    mesh_next = buffers.mesh_id[ny, nx]
    depth_next = buffers.depth[ny, nx]
    return (
        moving
        & (mesh_next != buffers.mesh_id)
        & (depth_next - buffers.depth > params.soft_z_extent)
    )


def normalize_response(x):
    """Map a non-negative gradient magnitude onto [0, 1): saturate(1 - 1/(x+1))."""
    return np.clip(1.0 - 1.0 / (np.asarray(x, dtype=np.float64) + 1.0), 0.0, 1.0)


def _sobel_gradients(plane):
    """5x5 Sobel correlation with clamped borders, accumulated over
    center-relative differences.

    Both kernels sum to zero, so subtracting the center value per window is
    exact algebra; it also makes the response exactly zero on constant
    windows instead of leaving rounding residue.
    """
    p = np.pad(plane, 2, mode="edge")
    h, w = plane.shape
    gx = np.zeros_like(plane)
    gy = np.zeros_like(plane)
    for dy in range(5):
        for dx in range(5):
            kx = SOBEL_X[dy, dx]
            ky = SOBEL_Y[dy, dx]
            if kx == 0.0 and ky == 0.0:
                continue
            diff = p[dy:dy + h, dx:dx + w] - plane
            if kx != 0.0:
                gx += kx * diff
            if ky != 0.0:
                gy += ky * diff
    return gx, gy


def edge_strength(depth, normal) -> np.ndarray:
    """Normalized edge response in [0, 1] per pixel.

    x = depth gradient magnitude + euclidean norm of the per-channel normal
    gradient magnitudes, computed with the 5x5 Sobel kernels and borders
    clamped; the response is saturate(1 - 1/(x + 1)). Miss pixels enter the
    depth plane as a large finite constant so silhouettes against empty
    space still register as edges.
    """
    d = np.asarray(depth, dtype=np.float64)
    d = np.where(np.isfinite(d), d, FAR_DEPTH)
    gx, gy = _sobel_gradients(d)
    delta_d = np.hypot(gx, gy)
    n = np.asarray(normal, dtype=np.float64)
    acc = np.zeros_like(d)
    for c in range(3):
        gxc, gyc = _sobel_gradients(n[..., c])
        acc += gxc ** 2 + gyc ** 2
    return normalize_response(delta_d + np.sqrt(acc))


def build_edge_mask(candidates, buffers: FrameBuffers, params: RayMaskParams) -> np.ndarray:
    response = edge_strength(buffers.depth, buffers.normal)
    return np.asarray(candidates, dtype=bool) & (response >= params.e)


_RANGE_SAMPLE_CAP = 128


def range_check(edge_mask, velocities, params: RayMaskParams) -> np.ndarray:
    """Spread the edge mask to pixels whose velocity crosses it.

    Each moving pixel samples equally spaced points from itself along +v up
    to one velocity magnitude (the pixel itself included); it enters the ray
    mask if any sampled point is marked. At least range_samples points are
    taken, densified so the stride stays at or under one pixel for the
    fastest velocity present (edge slivers are only a pixel or two wide and
    coarse strides step over them).
    """
    edge = np.asarray(edge_mask, dtype=bool)
    vel = np.asarray(velocities, dtype=np.float64)
    h, w = edge.shape
    speed = np.sqrt(vel[..., 0] ** 2 + vel[..., 1] ** 2)
    moving = speed > 0.0
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    hit = np.zeros_like(edge)
    top_speed = float(speed.max()) if np.any(moving) else 0.0
    s = min(max(params.range_samples, int(np.ceil(top_speed)) + 1), _RANGE_SAMPLE_CAP)
    fractions = [0.0] if s == 1 else [k / (s - 1) for k in range(s)]
    for f in fractions:
        sx = np.clip(np.rint(xs + f * vel[..., 0]), 0, w - 1).astype(np.intp)
        sy = np.clip(np.rint(ys + f * vel[..., 1]), 0, h - 1).astype(np.intp)
        hit |= edge[sy, sx]
    return moving & hit


def build_ray_mask(buffers: FrameBuffers, params: RayMaskParams) -> MaskBuffers:
    """Full mask pipeline: candidates, edge mask, then the range check."""
    candidates = candidate_filter(buffers, params)
    edge = build_edge_mask(candidates, buffers, params)
    ray = range_check(edge, buffers.velocity, params)
    return MaskBuffers(candidates=candidates, edge_mask=edge, ray_mask=ray)

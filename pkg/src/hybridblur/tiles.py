"""Sampling-range heuristic: per-pixel velocity clamping, per-tile dominant
velocity, and neighborhood dilation.

A tile stores the clamped velocity of maximum magnitude among its m x m
pixels; dilation takes the maximum-magnitude velocity over an n x n tile
window. Magnitude ties resolve to the first candidate in row-major scan
order so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TileParams:
    m: int = 40  # tile length, pixels
    n: int = 3  # neighborhood length, tiles

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("tile length m must be >= 1")
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError("neighborhood length n must be odd and >= 1")


def clamp_velocity(v, m: float) -> np.ndarray:
    """Clamp 2-vector magnitudes to m, preserving direction.

    Vectors at or below the limit pass through unchanged (scale factor is
    exactly 1.0).
    """
    if m <= 0:
        raise ValueError("clamp length must be positive")
    vel = np.asarray(v, dtype=np.float64)
    mag = np.sqrt(vel[..., 0] ** 2 + vel[..., 1] ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > m, m / mag, 1.0)
    return vel * scale[..., None]


def tile_max(velocities, params: TileParams) -> np.ndarray:
    """Per-tile dominant velocity of a clamped velocity plane.

    Returns an (H/m, W/m, 2) grid. The image resolution must be divisible by
    the tile length.
    """
    vel = np.asarray(velocities, dtype=np.float64)
    h, w = vel.shape[:2]
    m = params.m
    if h % m or w % m:
        raise ValueError(f"resolution {w}x{h} not divisible by tile length {m}")
    clamped = clamp_velocity(vel, m)
    ht, wt = h // m, w // m
    tiles = clamped.reshape(ht, m, wt, m, 2).transpose(0, 2, 1, 3, 4).reshape(ht, wt, m * m, 2)
    mag2 = tiles[..., 0] ** 2 + tiles[..., 1] ** 2
    best = np.argmax(mag2, axis=2)  # first maximum in row-major pixel order
    iy, ix = np.meshgrid(np.arange(ht), np.arange(wt), indexing="ij")
    return tiles[iy, ix, best]


def neighbor_max(grid, n: int) -> np.ndarray:
    """Dilate a tile grid with the n x n window maximum-magnitude velocity.

    Windows truncate at the image edges rather than wrapping.
    """
    if n < 1 or n % 2 == 0:
        raise ValueError("neighborhood length n must be odd and >= 1")
    g = np.asarray(grid, dtype=np.float64)
    if n == 1:
        return g.copy()
    ht, wt = g.shape[:2]
    half = n // 2
    mag2 = g[..., 0] ** 2 + g[..., 1] ** 2
    padded_mag = np.full((ht + 2 * half, wt + 2 * half), -np.inf)
    padded_mag[half:half + ht, half:half + wt] = mag2
    padded_vel = np.zeros((ht + 2 * half, wt + 2 * half, 2))
    padded_vel[half:half + ht, half:half + wt] = g

    # stack window offsets in row-major order; argmax keeps the first maximum
    stack_mag = np.stack(
        [
            padded_mag[dy:dy + ht, dx:dx + wt]
            for dy in range(n)
            for dx in range(n)
        ]
    )
    stack_vel = np.stack(
        [
            padded_vel[dy:dy + ht, dx:dx + wt]
            for dy in range(n)
            for dx in range(n)
        ]
    )
    best = np.argmax(stack_mag, axis=0)
    iy, ix = np.meshgrid(np.arange(ht), np.arange(wt), indexing="ij")
    return stack_vel[best, iy, ix]


def dominant_velocity_grid(velocities, params: TileParams) -> np.ndarray:
    """tile_max followed by neighbor_max: the gather filter's range heuristic."""
    return neighbor_max(tile_max(velocities, params), params.n)

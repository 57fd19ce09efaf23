"""Scene model: triangle meshes under per-frame linear motion, camera, lights.

All geometry is in world-space meters. Meshes translate rigidly by a constant
displacement per frame; the shutter-open interval is parameterised by a
normalised time tau in [0, 1], where tau = 1 is the current frame and tau = 0
is one exposure earlier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MISS_ID = -1
"""mesh_id sentinel for pixels or rays that hit nothing."""

FAR_DEPTH = 1.0e6
"""Finite stand-in for the infinite miss depth where filters need arithmetic."""


def luminance(color):
    """Rec. 709 luma of linear RGB with channels in [0, 1].

    Accepts a single RGB triple or any array with a trailing channel axis.
    """
    c = np.asarray(color, dtype=np.float64)
    return c[..., 0] * 0.2126 + c[..., 1] * 0.7152 + c[..., 2] * 0.0722


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64).reshape(3)
    return a.copy()


@dataclass
class Light:
    """Directional or point light with a scalar intensity (no falloff)."""

    kind: str  # "directional" | "point"
    direction: np.ndarray | None = None  # direction of travel, directional only
    position: np.ndarray | None = None  # point lights only
    intensity: float = 1.0

    def __post_init__(self):
        if self.kind not in ("directional", "point"):
            raise ValueError(f"unknown light kind {self.kind!r}")
        if self.kind == "directional":
            if self.direction is None:
                raise ValueError("directional light needs a direction")
            d = _vec3(self.direction)
            n = float(np.linalg.norm(d))
            if n == 0.0:
                raise ValueError("directional light direction must be nonzero")
            self.direction = d / n
        else:
            if self.position is None:
                raise ValueError("point light needs a position")
            self.position = _vec3(self.position)
        self.intensity = float(self.intensity)


@dataclass
class Camera:
    """Pinhole camera. Pixel (x, y) has its center at (x + 0.5, y + 0.5);
    x grows rightward, y grows downward."""

    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    vertical_fov: float  # degrees
    width: int
    height: int

    forward: np.ndarray = field(init=False)
    right: np.ndarray = field(init=False)
    up_cam: np.ndarray = field(init=False)
    focal_px: float = field(init=False)

    def __post_init__(self):
        self.position = _vec3(self.position)
        self.look_at = _vec3(self.look_at)
        self.up = _vec3(self.up)
        self.width = int(self.width)
        self.height = int(self.height)
        if self.width <= 0 or self.height <= 0:
            raise ValueError("camera resolution must be positive")
        if not 0.0 < self.vertical_fov < 180.0:
            raise ValueError("vertical_fov must be in (0, 180) degrees")
        fwd = self.look_at - self.position
        n = float(np.linalg.norm(fwd))
        if n == 0.0:
            raise ValueError("camera look_at coincides with position")
        self.forward = fwd / n
        right = np.cross(self.forward, self.up)
        rn = float(np.linalg.norm(right))
        if rn == 0.0:
            raise ValueError("camera up is parallel to the view direction")
        self.right = right / rn
        self.up_cam = np.cross(self.right, self.forward)
        self.focal_px = (self.height / 2.0) / math.tan(
            math.radians(self.vertical_fov) / 2.0
        )

    def ray_direction(self, x: int, y: int) -> np.ndarray:
        """Unit direction of the primary ray through pixel center (x, y).

        Bit-identical to the corresponding ray_directions() entry.
        """
        a = (x + 0.5 - self.width / 2.0) / self.focal_px
        b = (self.height / 2.0 - (y + 0.5)) / self.focal_px
        d = self.forward + a * self.right + b * self.up_cam
        n = np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        return d / n

    def ray_directions(self) -> np.ndarray:
        """Unit directions for every pixel center, shape (height, width, 3)."""
        xs = (np.arange(self.width) + 0.5 - self.width / 2.0) / self.focal_px
        ys = (self.height / 2.0 - (np.arange(self.height) + 0.5)) / self.focal_px
        d = (
            self.forward[None, None, :]
            + xs[None, :, None] * self.right[None, None, :]
            + ys[:, None, None] * self.up_cam[None, None, :]
        )
        n = np.sqrt(d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2])
        return d / n[..., None]

    def project(self, points):
        """Project world points to pixel coordinates.

        Returns (px, py, depth) where depth is the camera-space z (distance
        along the optical axis, meters). Points behind the camera yield
        depth <= 0; their pixel coordinates are not meaningful.
        """
        p = np.asarray(points, dtype=np.float64)
        v = p - self.position
        depth = v[..., 0] * self.forward[0] + v[..., 1] * self.forward[1] + v[..., 2] * self.forward[2]
        xc = v[..., 0] * self.right[0] + v[..., 1] * self.right[1] + v[..., 2] * self.right[2]
        yc = v[..., 0] * self.up_cam[0] + v[..., 1] * self.up_cam[1] + v[..., 2] * self.up_cam[2]
        with np.errstate(divide="ignore", invalid="ignore"):
            px = self.width / 2.0 + self.focal_px * xc / depth
            py = self.height / 2.0 - self.focal_px * yc / depth
        return px, py, depth

    def depth_of(self, points):
        """Camera-space depth (meters along the optical axis) of world points."""
        p = np.asarray(points, dtype=np.float64)
        v = p - self.position
        return v[..., 0] * self.forward[0] + v[..., 1] * self.forward[1] + v[..., 2] * self.forward[2]


@dataclass
class MeshInstance:
    """Rigid triangle mesh translating by frame_displacement every frame."""

    triangles: np.ndarray  # (T, 3, 3) world-space vertices
    albedo: np.ndarray  # RGB in [0, 1]
    mesh_id: int
    frame_displacement: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.triangles = np.asarray(self.triangles, dtype=np.float64).reshape(-1, 3, 3)
        self.albedo = _vec3(self.albedo)
        if np.any(self.albedo < 0.0) or np.any(self.albedo > 1.0):
            raise ValueError("albedo channels must be in [0, 1]")
        self.mesh_id = int(self.mesh_id)
        if self.mesh_id < 0:
            raise ValueError("mesh_id must be non-negative")
        self.frame_displacement = _vec3(self.frame_displacement)


@dataclass
class Scene:
    meshes: list
    lights: list
    camera: Camera
    frame_rate: float  # frames per second
    exposure: float  # seconds the shutter stays open
    background_color: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ambient: float = 0.0

    def __post_init__(self):
        if self.frame_rate <= 0.0:
            raise ValueError("frame_rate must be positive")
        if self.exposure <= 0.0:
            raise ValueError("exposure must be positive")
        self.background_color = _vec3(self.background_color)
        ids = [m.mesh_id for m in self.meshes]
        if len(set(ids)) != len(ids):
            raise ValueError("mesh IDs must be unique")

    @property
    def frames_per_exposure(self) -> float:
        return self.exposure * self.frame_rate

    def per_exposure_displacement(self, mesh: MeshInstance) -> np.ndarray:
        """World-space translation of a mesh over one full exposure."""
        return mesh.frame_displacement * self.frames_per_exposure

    def mesh_by_id(self, mesh_id: int) -> MeshInstance:
        for m in self.meshes:
            if m.mesh_id == mesh_id:
                return m
        raise KeyError(f"no mesh with id {mesh_id}")

    def triangle_count(self) -> int:
        return sum(m.triangles.shape[0] for m in self.meshes)


@dataclass
class HitRecord:
    t: float
    point: np.ndarray
    normal: np.ndarray  # unit, oriented against the incoming ray
    mesh_id: int
    albedo: np.ndarray


def shade_surface(normal, point, albedo, lights, ambient: float):
    """Lambertian shading with a constant ambient term, clamped to [0, 1].

    Broadcasts over leading axes; normal/point/albedo share a trailing
    3-channel axis.
    """
    n = np.asarray(normal, dtype=np.float64)
    p = np.asarray(point, dtype=np.float64)
    a = np.asarray(albedo, dtype=np.float64)
    term = np.asarray(float(ambient), dtype=np.float64)
    for light in lights:
        if light.kind == "directional":
            ldir = -light.direction
            cosine = (
                n[..., 0] * ldir[0] + n[..., 1] * ldir[1] + n[..., 2] * ldir[2]
            )
        else:
            to_light = light.position - p
            dist = np.linalg.norm(to_light, axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                unit = to_light / dist[..., None]
            unit = np.where(dist[..., None] > 0.0, unit, 0.0)
            cosine = (
                n[..., 0] * unit[..., 0]
                + n[..., 1] * unit[..., 1]
                + n[..., 2] * unit[..., 2]
            )
        term = term + light.intensity * np.maximum(cosine, 0.0)
    return np.clip(a * np.asarray(term)[..., None], 0.0, 1.0)


def shade(hit: HitRecord, lights, scene: Scene) -> np.ndarray:
    """Shade a single hit; see shade_surface."""
    return shade_surface(hit.normal, hit.point, hit.albedo, lights, scene.ambient)

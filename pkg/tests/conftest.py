"""Shared scene-building helpers for the test suite."""

import numpy as np
import pytest

from hybridblur import Camera, Light, MeshInstance, Scene


def make_camera(width=64, height=48, fov=60.0):
    """Camera at the origin looking down -z, y up."""
    return Camera(
        position=(0.0, 0.0, 0.0),
        look_at=(0.0, 0.0, -1.0),
        up=(0.0, 1.0, 0.0),
        vertical_fov=fov,
        width=width,
        height=height,
    )


def quad_mesh(mesh_id, albedo, z, half_w, half_h, center=(0.0, 0.0),
              frame_displacement=(0.0, 0.0, 0.0)):
    """Camera-facing quad in the plane z = const (z negative is in view)."""
    cx, cy = center
    corners = np.array(
        [
            [cx - half_w, cy - half_h, z],
            [cx + half_w, cy - half_h, z],
            [cx + half_w, cy + half_h, z],
            [cx - half_w, cy + half_h, z],
        ]
    )
    triangles = np.array([[corners[0], corners[1], corners[2]],
                          [corners[0], corners[2], corners[3]]])
    return MeshInstance(triangles=triangles, albedo=albedo, mesh_id=mesh_id,
                        frame_displacement=frame_displacement)


def frontal_light(intensity=0.9):
    return Light(kind="directional", direction=(0.0, 0.0, -1.0), intensity=intensity)


def make_scene(meshes, width=64, height=48, frame_rate=120.0, exposure=1.0 / 60.0,
               background=(0.05, 0.05, 0.08), ambient=0.1, lights=None, fov=60.0):
    return Scene(
        meshes=meshes,
        lights=[frontal_light()] if lights is None else lights,
        camera=make_camera(width, height, fov),
        frame_rate=frame_rate,
        exposure=exposure,
        background_color=background,
        ambient=ambient,
    )


def displacement_for_speed(px_per_exposure, depth, camera, frame_rate=120.0,
                           exposure=1.0 / 60.0):
    """World-space x displacement per frame giving the requested screen speed
    for motion parallel to the image plane at the given camera depth."""
    world_per_exposure = px_per_exposure * depth / camera.focal_px
    return world_per_exposure / (frame_rate * exposure)


def lambert_color(albedo, ambient=0.1, intensity=0.9, cosine=1.0):
    """Frontal-light Lambert shade as the tests' independent formula."""
    return np.clip(np.asarray(albedo) * (ambient + intensity * cosine), 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)

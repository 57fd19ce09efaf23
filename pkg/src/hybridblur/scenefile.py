"""Scene description files.

Scenes are JSON with top-level keys camera{position, look_at, up, fov,
width, height}, frame_rate, exposure, background_color, optional ambient,
lights[] and meshes[]. Mesh primitives (quad, box, tris) expand to triangle
lists at load time. Files may suggest per-scene filter defaults via the
optional soft_z_extent and edge_threshold keys.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .scene import Camera, Light, MeshInstance, Scene


class SceneError(ValueError):
    """Raised when a scene file fails to parse or validate."""


def _require(mapping, key, where):
    if key not in mapping:
        raise SceneError(f"{where}: missing required key {key!r}")
    return mapping[key]


def quad_triangles(corners) -> np.ndarray:
    """Two triangles from four corners given in perimeter order."""
    c = np.asarray(corners, dtype=np.float64)
    if c.shape != (4, 3):
        raise SceneError("quad needs exactly 4 vertices")
    return np.array([[c[0], c[1], c[2]], [c[0], c[2], c[3]]])


def box_triangles(bounds) -> np.ndarray:
    """Twelve triangles for an axis-aligned box given [min, max] corners."""
    b = np.asarray(bounds, dtype=np.float64)
    if b.shape != (2, 3):
        raise SceneError("box needs [min, max] corner vertices")
    lo, hi = b
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    quads = [
        [(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0)],  # z = z0
        [(x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)],  # z = z1
        [(x0, y0, z0), (x0, y1, z0), (x0, y1, z1), (x0, y0, z1)],  # x = x0
        [(x1, y0, z0), (x1, y1, z0), (x1, y1, z1), (x1, y0, z1)],  # x = x1
        [(x0, y0, z0), (x1, y0, z0), (x1, y0, z1), (x0, y0, z1)],  # y = y0
        [(x0, y1, z0), (x1, y1, z0), (x1, y1, z1), (x0, y1, z1)],  # y = y1
    ]
    return np.concatenate([quad_triangles(q) for q in quads], axis=0)


def _mesh_from_entry(entry, index) -> MeshInstance:
    where = f"meshes[{index}]"
    primitive = entry.get("primitive", "tris")
    vertices = _require(entry, "vertices", where)
    if primitive == "quad":
        tris = quad_triangles(vertices)
    elif primitive == "box":
        tris = box_triangles(vertices)
    elif primitive == "tris":
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim == 2:
            if v.shape[0] % 3:
                raise SceneError(f"{where}: triangle list length not a multiple of 3")
            v = v.reshape(-1, 3, 3)
        if v.ndim != 3 or v.shape[1:] != (3, 3):
            raise SceneError(f"{where}: bad triangle vertex array")
        tris = v
    else:
        raise SceneError(f"{where}: unknown primitive {primitive!r}")
    try:
        return MeshInstance(
            triangles=tris,
            albedo=_require(entry, "albedo", where),
            mesh_id=_require(entry, "id", where),
            frame_displacement=entry.get("frame_displacement", (0.0, 0.0, 0.0)),
        )
    except ValueError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def _light_from_entry(entry, index) -> Light:
    where = f"lights[{index}]"
    kind = _require(entry, "type", where)
    try:
        return Light(
            kind=kind,
            direction=entry.get("direction"),
            position=entry.get("position"),
            intensity=entry.get("intensity", 1.0),
        )
    except ValueError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def parse_scene(doc: dict, where: str = "scene") -> Scene:
    cam_doc = _require(doc, "camera", where)
    try:
        camera = Camera(
            position=_require(cam_doc, "position", "camera"),
            look_at=_require(cam_doc, "look_at", "camera"),
            up=cam_doc.get("up", (0.0, 1.0, 0.0)),
            vertical_fov=_require(cam_doc, "fov", "camera"),
            width=_require(cam_doc, "width", "camera"),
            height=_require(cam_doc, "height", "camera"),
        )
    except ValueError as exc:
        raise SceneError(f"camera: {exc}") from exc
    meshes = [_mesh_from_entry(m, i) for i, m in enumerate(doc.get("meshes", []))]
    lights = [_light_from_entry(l, i) for i, l in enumerate(doc.get("lights", []))]
    try:
        return Scene(
            meshes=meshes,
            lights=lights,
            camera=camera,
            frame_rate=_require(doc, "frame_rate", where),
            exposure=_require(doc, "exposure", where),
            background_color=doc.get("background_color", (0.0, 0.0, 0.0)),
            ambient=doc.get("ambient", 0.0),
        )
    except ValueError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SceneError(f"{path}: {exc}") from exc
    return parse_scene(doc, where=str(path))


def load_scene_defaults(path) -> dict:
    """Per-scene filter suggestions (soft_z_extent, edge_threshold), if any."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SceneError(f"{path}: {exc}") from exc
    out = {}
    for key in ("soft_z_extent", "edge_threshold"):
        if key in doc:
            out[key] = float(doc[key])
    return out


def bundled_scene_path(name: str) -> Path:
    """Filesystem path of a scene shipped with the package."""
    ref = resources.files("hybridblur").joinpath("scenes", f"{name}.json")
    with resources.as_file(ref) as p:
        return Path(p)


def bundled_scene_names() -> list[str]:
    folder = resources.files("hybridblur").joinpath("scenes")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))

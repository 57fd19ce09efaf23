"""Scene file parsing and image/plane I/O."""

import json
import struct

import numpy as np
import pytest

from hybridblur import SceneError, bundled_scene_names, bundled_scene_path, load_scene
from hybridblur.imgio import (
    PLANE_MAGIC,
    read_image,
    read_plane,
    write_pgm,
    write_plane,
    write_png,
    write_ppm,
)
from hybridblur.scenefile import load_scene_defaults, parse_scene


def minimal_doc(**overrides):
    doc = {
        "camera": {"position": [0, 0, 0], "look_at": [0, 0, -1], "up": [0, 1, 0],
                   "fov": 60.0, "width": 32, "height": 24},
        "frame_rate": 120.0,
        "exposure": 1 / 60,
        "background_color": [0.1, 0.1, 0.1],
        "lights": [{"type": "directional", "direction": [0, 0, -1], "intensity": 0.9}],
        "meshes": [
            {"id": 0, "albedo": [0.5, 0.5, 0.5], "primitive": "quad",
             "vertices": [[-1, -1, -2], [1, -1, -2], [1, 1, -2], [-1, 1, -2]]},
        ],
    }
    doc.update(overrides)
    return doc


class TestParsing:
    def test_minimal_scene(self):
        scene = parse_scene(minimal_doc())
        assert scene.camera.width == 32
        assert len(scene.meshes) == 1
        assert scene.meshes[0].triangles.shape == (2, 3, 3)

    def test_box_expands_to_twelve_triangles(self):
        doc = minimal_doc(meshes=[{"id": 0, "albedo": [0.5, 0.5, 0.5],
                                   "primitive": "box",
                                   "vertices": [[-1, -1, -3], [1, 1, -2]]}])
        scene = parse_scene(doc)
        assert scene.meshes[0].triangles.shape == (12, 3, 3)

    def test_raw_triangle_list(self):
        doc = minimal_doc(meshes=[{"id": 0, "albedo": [0.5, 0.5, 0.5],
                                   "primitive": "tris",
                                   "vertices": [[0, 0, -2], [1, 0, -2], [0, 1, -2],
                                                [0, 0, -3], [1, 0, -3], [0, 1, -3]]}])
        scene = parse_scene(doc)
        assert scene.meshes[0].triangles.shape == (2, 3, 3)

    def test_missing_camera_key(self):
        doc = minimal_doc()
        del doc["camera"]["fov"]
        with pytest.raises(SceneError, match="fov"):
            parse_scene(doc)

    def test_duplicate_ids_rejected(self):
        doc = minimal_doc()
        doc["meshes"].append(dict(doc["meshes"][0]))
        with pytest.raises(SceneError, match="unique"):
            parse_scene(doc)

    def test_bad_albedo_rejected(self):
        doc = minimal_doc()
        doc["meshes"][0]["albedo"] = [1.5, 0.0, 0.0]
        with pytest.raises(SceneError, match="albedo"):
            parse_scene(doc)

    def test_unknown_primitive(self):
        doc = minimal_doc()
        doc["meshes"][0]["primitive"] = "sphere"
        with pytest.raises(SceneError, match="primitive"):
            parse_scene(doc)

    def test_load_scene_and_defaults(self, tmp_path):
        doc = minimal_doc(soft_z_extent=0.005, edge_threshold=0.96)
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(doc))
        scene = load_scene(path)
        assert scene.frame_rate == 120.0
        assert load_scene_defaults(path) == {"soft_z_extent": 0.005,
                                             "edge_threshold": 0.96}

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SceneError):
            load_scene(path)


class TestBundledScenes:
    def test_all_bundled_scenes_load(self):
        names = bundled_scene_names()
        assert {"two_quads", "static_scene", "occluder_patterned", "quad_motion"} <= set(names)
        for name in names:
            scene = load_scene(bundled_scene_path(name))
            assert scene.camera.width % 40 == 0
            assert scene.camera.height % 40 == 0
            assert scene.triangle_count() > 0


class TestImageIO:
    def test_png_roundtrip(self, tmp_path, rng):
        img = rng.uniform(size=(20, 30, 3))
        path = tmp_path / "out.png"
        write_png(path, img)
        back = read_image(path)
        np.testing.assert_allclose(back, np.rint(img * 255.0) / 255.0, atol=1e-12)

    def test_ppm_roundtrip(self, tmp_path, rng):
        img = rng.uniform(size=(12, 17, 3))
        path = tmp_path / "out.ppm"
        write_ppm(path, img)
        back = read_image(path)
        np.testing.assert_allclose(back, np.rint(img * 255.0) / 255.0, atol=1e-12)

    def test_pgm_mask(self, tmp_path):
        mask = np.zeros((6, 9), dtype=bool)
        mask[2:4, 3:7] = True
        path = tmp_path / "mask.pgm"
        write_pgm(path, mask)
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n9 6\n255\n")
        data = np.frombuffer(raw[len(b"P5\n9 6\n255\n"):], dtype=np.uint8).reshape(6, 9)
        np.testing.assert_array_equal(data == 255, mask)


class TestPlaneDumps:
    def test_header_layout(self, tmp_path):
        path = tmp_path / "plane.hmbp"
        write_plane(path, np.zeros((4, 6)))
        raw = path.read_bytes()
        magic, w, h, c = struct.unpack("<4sIII", raw[:16])
        assert magic == PLANE_MAGIC
        assert (w, h, c) == (6, 4, 1)
        assert len(raw) == 16 + 4 * 6 * 4

    def test_roundtrip_multichannel(self, tmp_path, rng):
        plane = rng.normal(size=(5, 7, 2)).astype(np.float32).astype(np.float64)
        path = tmp_path / "vel.hmbp"
        write_plane(path, plane)
        np.testing.assert_array_equal(read_plane(path), plane)

    def test_roundtrip_single_channel(self, tmp_path, rng):
        plane = rng.normal(size=(5, 7)).astype(np.float32).astype(np.float64)
        path = tmp_path / "depth.hmbp"
        write_plane(path, plane)
        back = read_plane(path)
        assert back.shape == (5, 7)
        np.testing.assert_array_equal(back, plane)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "junk.hmbp"
        path.write_bytes(b"JUNK" + b"\0" * 20)
        with pytest.raises(ValueError, match="plane dump"):
            read_plane(path)

"""Recursive ray reveal of occluded background."""

import numpy as np

from hybridblur import (
    RayMaskParams,
    RevealParams,
    build_bvh,
    build_ray_mask,
    merged_background,
    render_gbuffer,
    reveal_pass,
    reveal_pixel,
)

from conftest import (
    displacement_for_speed,
    lambert_color,
    make_camera,
    make_scene,
    quad_mesh,
)


def two_quad_scene(width=64, height=48, speed_px=10.0):
    cam = make_camera(width, height)
    disp = displacement_for_speed(speed_px, 2.0, cam)
    front = quad_mesh(0, (0.8, 0.1, 0.1), -2.0, 0.5, 0.5,
                      frame_displacement=(disp, 0.0, 0.0))
    back = quad_mesh(1, (0.9, 0.9, 0.9), -3.0, 4.0, 3.0)
    return make_scene([front, back], width=width, height=height)


class TestRevealPixel:
    def test_front_over_back_reveals_back(self):
        scene = two_quad_scene()
        bvh = build_bvh(scene, 1.0)
        record = reveal_pixel(scene, bvh, scene.camera, (32, 24), RevealParams())
        assert record.valid
        assert abs(record.depth - 3.0) < 1e-9
        np.testing.assert_allclose(record.color, lambert_color((0.9, 0.9, 0.9)), atol=1e-6)
        np.testing.assert_array_equal(record.velocity, [0.0, 0.0])

    def test_escape_reveals_environment(self):
        scene = make_scene([quad_mesh(0, (0.8, 0.1, 0.1), -2.0, 0.5, 0.5,
                                      frame_displacement=(0.05, 0.0, 0.0))],
                           background=(0.2, 0.3, 0.4))
        bvh = build_bvh(scene, 1.0)
        record = reveal_pixel(scene, bvh, scene.camera, (32, 24), RevealParams())
        assert record.valid
        assert np.isinf(record.depth)
        np.testing.assert_array_equal(record.color, [0.2, 0.3, 0.4])

    def test_recursion_limit_on_equal_luminance_stack(self):
        layers = [quad_mesh(i, (0.5, 0.5, 0.5), -2.0 - 0.1 * i, 1.0, 1.0)
                  for i in range(8)]
        scene = make_scene(layers)
        bvh = build_bvh(scene, 1.0)
        record = reveal_pixel(scene, bvh, scene.camera, (32, 24),
                              RevealParams(max_recursion=5))
        assert not record.valid

    def test_single_recursion_is_second_surface(self):
        stack = [
            quad_mesh(0, (0.8, 0.1, 0.1), -2.0, 1.0, 1.0),
            quad_mesh(1, (0.1, 0.8, 0.1), -2.5, 1.0, 1.0),
            quad_mesh(2, (0.1, 0.1, 0.8), -3.0, 1.0, 1.0),
        ]
        scene = make_scene(stack)
        bvh = build_bvh(scene, 1.0)
        record = reveal_pixel(scene, bvh, scene.camera, (32, 24),
                              RevealParams(max_recursion=1))
        assert record.valid
        assert abs(record.depth - 2.5) < 1e-9
        np.testing.assert_allclose(record.color, lambert_color((0.1, 0.8, 0.1)), atol=1e-6)

    def test_same_luminance_second_layer_exhausts_single_recursion(self):
        stack = [
            quad_mesh(0, (0.5, 0.5, 0.5), -2.0, 1.0, 1.0),
            quad_mesh(1, (0.5, 0.5, 0.5), -2.5, 1.0, 1.0),
            quad_mesh(2, (0.1, 0.1, 0.8), -3.0, 1.0, 1.0),
        ]
        scene = make_scene(stack)
        bvh = build_bvh(scene, 1.0)
        record = reveal_pixel(scene, bvh, scene.camera, (32, 24),
                              RevealParams(max_recursion=1))
        assert not record.valid

    def test_revealed_velocity_of_moving_background(self):
        cam = make_camera()
        disp = displacement_for_speed(6.0, 3.0, cam)
        front = quad_mesh(0, (0.8, 0.1, 0.1), -2.0, 0.5, 0.5)
        back = quad_mesh(1, (0.9, 0.9, 0.9), -3.0, 4.0, 3.0,
                         frame_displacement=(disp, 0.0, 0.0))
        scene = make_scene([front, back])
        bvh = build_bvh(scene, 1.0)
        record = reveal_pixel(scene, bvh, scene.camera, (32, 24), RevealParams())
        assert record.valid
        np.testing.assert_allclose(record.velocity, [6.0, 0.0], atol=1e-9)


class TestRevealPass:
    def test_empty_mask_traces_nothing(self):
        scene = two_quad_scene()
        fb = render_gbuffer(scene)
        mask = np.zeros((fb.height, fb.width), dtype=bool)
        rb = reveal_pass(scene, fb, mask, RevealParams())
        assert rb.traced == 0
        assert not rb.valid.any()

    def test_traced_equals_mask_population(self):
        scene = two_quad_scene()
        fb = render_gbuffer(scene)
        masks = build_ray_mask(fb, RayMaskParams())
        rb = reveal_pass(scene, fb, masks.ray_mask, RevealParams())
        assert rb.traced == int(masks.ray_mask.sum())
        assert masks.ray_mask.sum() > 0
        assert not rb.valid[~masks.ray_mask].any()

    def test_valid_depth_behind_gbuffer_depth(self):
        scene = two_quad_scene()
        fb = render_gbuffer(scene)
        masks = build_ray_mask(fb, RayMaskParams())
        rb = reveal_pass(scene, fb, masks.ray_mask, RevealParams())
        sel = rb.valid
        assert sel.any()
        assert np.all(rb.depth[sel] > fb.depth[sel])

    def test_deterministic(self):
        scene = two_quad_scene()
        fb = render_gbuffer(scene)
        masks = build_ray_mask(fb, RayMaskParams())
        a = reveal_pass(scene, fb, masks.ray_mask, RevealParams())
        b = reveal_pass(scene, fb, masks.ray_mask, RevealParams())
        np.testing.assert_array_equal(a.color, b.color)
        np.testing.assert_array_equal(a.depth, b.depth)
        np.testing.assert_array_equal(a.velocity, b.velocity)
        np.testing.assert_array_equal(a.valid, b.valid)

    def test_full_mask_single_quad_all_escape(self):
        scene = make_scene([quad_mesh(0, (0.8, 0.1, 0.1), -2.0, 5.0, 5.0,
                                      frame_displacement=(0.05, 0.0, 0.0))],
                           background=(0.2, 0.3, 0.4))
        fb = render_gbuffer(scene)
        mask = np.ones((fb.height, fb.width), dtype=bool)
        rb = reveal_pass(scene, fb, mask, RevealParams())
        assert rb.traced == mask.size
        assert rb.valid.all()
        assert np.all(np.isinf(rb.depth))
        np.testing.assert_array_equal(
            rb.color, np.broadcast_to((0.2, 0.3, 0.4), rb.color.shape)
        )


class TestMergedBackground:
    def test_fallback_planes(self):
        scene = two_quad_scene()
        fb = render_gbuffer(scene)
        masks = build_ray_mask(fb, RayMaskParams())
        rb = reveal_pass(scene, fb, masks.ray_mask, RevealParams())
        merged = merged_background(fb, rb)
        valid = rb.valid
        np.testing.assert_array_equal(merged.color[valid], rb.color[valid])
        np.testing.assert_array_equal(merged.color[~valid], fb.color[~valid])
        np.testing.assert_array_equal(merged.depth[~valid], fb.depth[~valid])
        assert np.all(merged.velocity[~valid] == 0.0)


def test_hybrid_pipeline_bit_reproducible():
    from hybridblur.pipeline import RunConfig, resolve_params, run_hybrid
    from hybridblur import bundled_scene_path, load_scene, load_scene_defaults

    path = bundled_scene_path("two_quads")
    defaults = load_scene_defaults(path)
    mask_p, rev_p, filt_p, _ = resolve_params(RunConfig(scene_path="-"), defaults)
    a = run_hybrid(load_scene(path), mask_p, rev_p, filt_p)
    b = run_hybrid(load_scene(path), mask_p, rev_p, filt_p)
    np.testing.assert_array_equal(a.image, b.image)

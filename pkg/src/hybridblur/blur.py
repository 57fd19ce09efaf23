"""Motion-blur gather filter and the final composite.

Each pixel gathers sample contributions along the dominant velocity of its
tile neighborhood, with the pixel anchored at one end of the sampling range
so inner and outer blur stay separable. Per-sample weights classify
contributions into foreground (a blurry sample sweeping over the target),
background (any sample showing through a blurry target) and the mutual-blur
case of two fast movers; the composite later re-weights foreground against
ray-revealed background inside the ray mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import hash_uniform
from .scene import FAR_DEPTH
from .tiles import TileParams


def saturate(x):
    """Clamp to [0, 1]."""
    return np.clip(x, 0.0, 1.0)


def smoothstep(a: float, b: float, x):
    """Cubic Hermite ramp: 0 for x <= a, 1 for x >= b."""
    if not a < b:
        raise ValueError("smoothstep requires a < b")
    t = np.clip((x - a) / (b - a), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cylinder(v, s):
    """Soft test of whether distance s lies within speed v.

    1 - smoothstep(0.95 v, 1.05 v, s); the degenerate v = 0 interval
    resolves to 1 at s = 0 and 0 elsewhere.
    """
    vv = np.asarray(v, dtype=np.float64)
    ss = np.asarray(s, dtype=np.float64)
    a = 0.95 * vv
    b = 1.05 * vv
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip((ss - a) / (b - a), 0.0, 1.0)
    ramp = t * t * (3.0 - 2.0 * t)
    out = np.where(vv > 0.0, 1.0 - ramp, np.where(ss == 0.0, 1.0, 0.0))
    return out if out.ndim else float(out)


def _ratio(ds, v):
    """saturate(1 - ds / v) with the v = 0 convention: 1 at ds = 0, else 0."""
    dd = np.asarray(ds, dtype=np.float64)
    vv = np.asarray(v, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.clip(1.0 - dd / vv, 0.0, 1.0)
    return np.where(vv > 0.0, r, np.where(dd == 0.0, 1.0, 0.0))


def weight_terms(z_t, z_s, v_t, v_s, delta_s, soft_z_extent: float):
    """Vectorized sample-weight terms (w_f, w_b, w_s).

    z_t/z_s are camera-space depths of target and sample, v_t/v_s their
    screen-space speeds, delta_s the screen distance between them. The depth
    ratio z = (z_t - z_s) / soft_z_extent classifies the sample as foreground
    (z > 0: sample is in front) or background.
    """
    z = (np.asarray(z_t, dtype=np.float64) - np.asarray(z_s, dtype=np.float64)) / soft_z_extent
    w_f = saturate(1.0 + z) * _ratio(delta_s, v_s)
    w_b = saturate(1.0 - z) * _ratio(delta_s, v_t)
    w_s = cylinder(v_s, delta_s) * cylinder(v_t, delta_s) * 2.0
    return w_f, w_b, w_s


@dataclass
class WeightTerms:
    w_f: float
    w_b: float
    w_s: float
    w: float


def sample_weight(z_t: float, z_s: float, v_t: float, v_s: float,
                  delta_s: float, soft_z_extent: float) -> WeightTerms:
    """Weight of one sample's contribution to one target pixel."""
    if soft_z_extent <= 0.0:
        raise ValueError("soft_z_extent must be positive")
    w_f, w_b, w_s = weight_terms(z_t, z_s, v_t, v_s, delta_s, soft_z_extent)
    w_f = float(w_f)
    w_b = float(w_b)
    w_s = float(w_s)
    return WeightTerms(w_f=w_f, w_b=w_b, w_s=w_s, w=w_f + w_b + w_s)


@dataclass
class FilterParams:
    sample_count: int = 15
    soft_z_extent: float = 0.03
    fg_edge_boost: float = 30.0  # foreground magnification at depth edges
    mask_bg_factor: float = 3.0  # background magnification inside the ray mask
    tile: TileParams = field(default_factory=TileParams)
    sample_direction: str = "leading"  # leading: sample along +v
    jitter: bool = False
    jitter_seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.soft_z_extent <= 0.0:
            raise ValueError("soft_z_extent must be positive")
        if self.fg_edge_boost < 1.0 or self.mask_bg_factor < 1.0:
            raise ValueError("weight magnifications must be >= 1")
        if self.sample_direction not in ("trailing", "leading"):
            raise ValueError("sample_direction must be 'trailing' or 'leading'")


@dataclass
class BlurOutput:
    """Blurred color plus the weight bookkeeping the compositor consumes.

    fg_weight_sum collects the foreground case, bg_weight_sum the two
    background cases; total_weight_sum is the normalization total including
    the unit self-sample weight (exactly 1 where the filter is inactive).
    """

    color: np.ndarray  # (H, W, 3)
    fg_weight_sum: np.ndarray  # (H, W)
    bg_weight_sum: np.ndarray  # (H, W)
    total_weight_sum: np.ndarray  # (H, W)


_VELOCITY_FLOOR = 0.5  # pixels per exposure; below this the filter passes through


def gather_blur(buffers, tiles, params: FilterParams, mask=None) -> BlurOutput:
    """Blur an image along its neighborhood-dominant velocities.

    buffers needs color (H, W, 3), depth (H, W) and velocity (H, W, 2)
    attributes; tiles is the dilated (H/m, W/m, 2) dominant-velocity grid of
    that same velocity plane. Pixels whose dominant velocity is shorter than
    half a pixel pass through unchanged with zero case weights. When a mask
    is given, case-weight sums are reported only inside it.
    """
    color = np.asarray(buffers.color, dtype=np.float64)
    depth = np.asarray(buffers.depth, dtype=np.float64)
    vel = np.asarray(buffers.velocity, dtype=np.float64)
    h, w = depth.shape
    m = params.tile.m
    grid = np.asarray(tiles, dtype=np.float64)
    if grid.shape[:2] != (h // m, w // m):
        raise ValueError("tile grid does not match the image resolution")

    vn = np.repeat(np.repeat(grid, m, axis=0), m, axis=1)
    vn_mag = np.sqrt(vn[..., 0] ** 2 + vn[..., 1] ** 2)
    active = vn_mag >= _VELOCITY_FLOOR

    depth_c = np.where(np.isfinite(depth), depth, FAR_DEPTH)
    speed = np.sqrt(vel[..., 0] ** 2 + vel[..., 1] ** 2)
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")

    color_sum = color.copy()  # self sample, weight 1
    weight_sum = np.ones((h, w))
    fg_sum = np.zeros((h, w))
    bg_sum = np.zeros((h, w))

    s = params.sample_count
    sign = -1.0 if params.sample_direction == "trailing" else 1.0
    jitter = None
    if params.jitter and s > 1:
        jitter = hash_uniform(xs, ys, 0, params.jitter_seed) - 0.5

    for i in range(1, s):
        f = i / (s - 1)
        if jitter is not None:
            f = np.clip((i + jitter) / (s - 1), 0.0, 1.0)
        sx = np.clip(np.rint(xs + sign * f * vn[..., 0]), 0, w - 1).astype(np.intp)
        sy = np.clip(np.rint(ys + sign * f * vn[..., 1]), 0, h - 1).astype(np.intp)
        delta_s = f * vn_mag
        z_s = depth_c[sy, sx]
        v_s = speed[sy, sx]
        w_f, w_b, w_s = weight_terms(depth_c, z_s, speed, v_s, delta_s, params.soft_z_extent)
        # target deeper than its sample: boost the foreground sweep so the
        # edge-to-outer-blur transition stays smooth
        w_f = np.where(depth_c - z_s >= params.soft_z_extent, w_f * params.fg_edge_boost, w_f)
        wi = w_f + w_b + w_s
        color_sum += wi[..., None] * color[sy, sx]
        weight_sum += wi
        fg_sum += w_f
        bg_sum += w_b + w_s

    out_color = np.where(active[..., None], color_sum / weight_sum[..., None], color)
    fg = np.where(active, fg_sum, 0.0)
    bg = np.where(active, bg_sum, 0.0)
    total = np.where(active, weight_sum, 1.0)
    if mask is not None:
        inside = np.asarray(mask, dtype=bool)
        fg = np.where(inside, fg, 0.0)
        bg = np.where(inside, bg, 0.0)
    return BlurOutput(color=out_color, fg_weight_sum=fg, bg_weight_sum=bg,
                      total_weight_sum=total)


def composite(pp_raster: BlurOutput, pp_reveal: BlurOutput, mask,
              params: FilterParams, reveal_valid=None) -> np.ndarray:
    """Blend blurred raster with blurred revealed background inside the mask.

    Masked pixels mix (W_f / k) parts raster color with (k * W_b) parts
    revealed color, where W_f is the raster foreground weight sum, W_b the
    reveal total weight sum and k the mask background magnification. Pixels
    outside the mask, or whose reveal record was invalid, keep the raster
    color.
    """
    if pp_raster.color.shape != pp_reveal.color.shape:
        raise ValueError("blur outputs differ in resolution")
    out = pp_raster.color.copy()
    use = np.asarray(mask, dtype=bool)
    if reveal_valid is not None:
        use = use & np.asarray(reveal_valid, dtype=bool)
    if not np.any(use):
        return out
    k = params.mask_bg_factor
    a = pp_raster.fg_weight_sum / k
    b = k * pp_reveal.total_weight_sum
    denom = a + b
    blendable = use & (denom > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        blend = (a[..., None] * pp_raster.color + b[..., None] * pp_reveal.color) / denom[..., None]
    out[blendable] = blend[blendable]
    return out

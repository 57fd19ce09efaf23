"""Counter-based deterministic random numbers.

Hashing (x, y, k, seed) to a uniform float gives every pixel and sample its
own reproducible stream with no shared generator state, so parallel
evaluation order cannot change a render.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_KEY_Y = np.uint64(0xC2B2AE3D27D4EB4F)
_KEY_K = np.uint64(0x165667B19E3779F9)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def hash_uniform(x, y, k, seed: int):
    """Uniform float64 in [0, 1) keyed by pixel (x, y), counter k and seed.

    Accepts scalars or integer arrays; uint64 wraparound is intended.
    """
    with np.errstate(over="ignore"):
        xs = np.asarray(x).astype(np.uint64)
        ys = np.asarray(y).astype(np.uint64)
        ks = np.asarray(k).astype(np.uint64)
        state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        state = _mix64(state ^ (xs * _GAMMA))
        state = _mix64(state ^ (ys * _KEY_Y))
        state = _mix64(state ^ (ks * _KEY_K))
    return (state >> np.uint64(11)).astype(np.float64) * _INV_2_53

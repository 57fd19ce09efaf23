"""Image and buffer I/O: PNG/PPM output, PGM masks, and the binary plane
dump format used by --dump-intermediate.

Plane dumps carry a 16-byte header (magic "HMBP", then width, height and
channel count as little-endian uint32) followed by row-major little-endian
float32 samples.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

PLANE_MAGIC = b"HMBP"


def to_uint8(img) -> np.ndarray:
    a = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.rint(a * 255.0).astype(np.uint8)


def write_png(path, img) -> None:
    Image.fromarray(to_uint8(img), mode="RGB").save(Path(path), format="PNG")


def write_ppm(path, img) -> None:
    data = to_uint8(img)
    h, w = data.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def write_pgm(path, plane) -> None:
    a = np.asarray(plane)
    if a.dtype == bool:
        data = np.where(a, 255, 0).astype(np.uint8)
    else:
        data = np.rint(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_image(path) -> np.ndarray:
    """Load an image file as float RGB in [0, 1]."""
    with Image.open(Path(path)) as im:
        rgb = im.convert("RGB")
        return np.asarray(rgb, dtype=np.float64) / 255.0


def write_plane(path, plane) -> None:
    a = np.asarray(plane, dtype=np.float32)
    if a.ndim == 2:
        a = a[..., None]
    if a.ndim != 3:
        raise ValueError("plane must be (H, W) or (H, W, C)")
    h, w, c = a.shape
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIII", PLANE_MAGIC, w, h, c))
        f.write(a.astype("<f4").tobytes(order="C"))


def read_plane(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(16)
        magic, w, h, c = struct.unpack("<4sIII", header)
        if magic != PLANE_MAGIC:
            raise ValueError(f"{path}: not a plane dump")
        data = np.frombuffer(f.read(), dtype="<f4")
    plane = data.reshape(h, w, c).astype(np.float64)
    return plane[..., 0] if c == 1 else plane

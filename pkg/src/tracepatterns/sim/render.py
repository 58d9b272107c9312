"""Frame rasterization to binary portable pixmaps (P6)."""

from __future__ import annotations

import os

import numpy as np

from ..trace.model import SceneObject, Trace

SIZE = 256
BACKGROUND = (245, 245, 245)
PALETTE = {
    "red": (205, 60, 50),
    "green": (50, 170, 80),
    "blue": (60, 100, 210),
    "black": (45, 45, 45),
}

_XS, _YS = np.meshgrid(
    np.arange(SIZE, dtype=np.float64) + 0.5,
    SIZE - 0.5 - np.arange(SIZE, dtype=np.float64),
)


def _object_mask(obj: SceneObject) -> np.ndarray:
    if obj.type == "circle":
        cx, cy = obj.obj_params["center"]
        r = obj.obj_params["radius"]
        return (_XS - cx) ** 2 + (_YS - cy) ** 2 <= r * r
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    for poly in obj.polygons():
        inside = np.ones((SIZE, SIZE), dtype=bool)
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            # CCW polygons: interior is left of each edge.
            inside &= (x1 - x0) * (_YS - y0) - (y1 - y0) * (_XS - x0) >= 0.0
        mask |= inside
    return mask


def render_scene_image(objects: list[SceneObject]) -> np.ndarray:
    img = np.empty((SIZE, SIZE, 3), dtype=np.uint8)
    img[:, :] = BACKGROUND
    for obj in objects:
        color = PALETTE.get(obj.color, PALETTE["black"])
        img[_object_mask(obj)] = color
    return img


def write_ppm(path: str, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def render_frames(trace: Trace, out_dir: str) -> int:
    """One PPM per frame; static objects drawn from the scene, dynamic from
    the frame. Returns the number of files written."""
    os.makedirs(out_dir, exist_ok=True)
    statics = [o for o in trace.scene if o.static]
    for i, frame in enumerate(trace.frames):
        img = render_scene_image(statics + list(frame.objects))
        write_ppm(os.path.join(out_dir, f"frame_{i:05d}.ppm"), img)
    return len(trace.frames)

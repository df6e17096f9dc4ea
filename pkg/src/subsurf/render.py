"""Image export: binary PGM label grids and PNG renderings.

Class palette convention: chaotic = blue, faults = green, salt dome = red.
Attribute grids map linearly (min-max) to gray. Output bytes are a pure
function of the input grid.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import DataError

#: index 0 reserved for background (black), then blue / green / red, then
#: extras for additional classes
PALETTE = [
    (0, 0, 0),
    (0, 0, 255),     # chaotic
    (0, 255, 0),     # faults
    (255, 0, 0),     # salt dome
    (255, 255, 0),
    (0, 255, 255),
    (255, 0, 255),
    (255, 255, 255),
]


def write_pgm(labels: np.ndarray, path) -> None:
    """Binary PGM/P5, one byte per class id."""
    lab = np.asarray(labels)
    if lab.ndim != 2:
        raise DataError("PGM export expects a 2D grid")
    if lab.min() < 0 or lab.max() > 255:
        raise DataError("class ids must fit one byte")
    h, w = lab.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(lab.astype(np.uint8).tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"P5":
            raise DataError(f"{path}: not a binary PGM")
        dims = f.readline().split()
        maxval = f.readline()
        w, h = int(dims[0]), int(dims[1])
        data = f.read(w * h)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w)


def render_labels_png(labels: np.ndarray, path) -> None:
    """Fixed-palette color PNG for class-id grids."""
    lab = np.asarray(labels, dtype=int)
    if lab.ndim != 2:
        raise DataError("label render expects a 2D grid")
    rgb = np.zeros(lab.shape + (3,), dtype=np.uint8)
    for cid in np.unique(lab):
        rgb[lab == cid] = PALETTE[int(cid) % len(PALETTE)]
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def render_gray_png(grid: np.ndarray, path) -> None:
    """Linear min-max gray mapping for scalar attribute grids."""
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 2:
        raise DataError("gray render expects a 2D grid")
    lo, hi = g.min(), g.max()
    if hi > lo:
        g = (g - lo) / (hi - lo)
    else:
        g = np.zeros_like(g)
    Image.fromarray((g * 255).round().astype(np.uint8), mode="L") \
        .save(path, format="PNG")


def render_rgb_png(channels: np.ndarray, path) -> None:
    """Three stacked channel grids (values in [0, 1]) as an RGB PNG."""
    ch = np.asarray(channels, dtype=np.float64)
    if ch.ndim != 3 or ch.shape[0] != 3:
        raise DataError("RGB render expects (3, rows, cols)")
    rgb = (np.clip(np.moveaxis(ch, 0, -1), 0, 1) * 255).round().astype(np.uint8)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")

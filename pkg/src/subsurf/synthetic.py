"""Deterministic synthetic volumes with voxel-exact ground truth.

The base model is a stack of sinusoidal reflectors with gentle lateral
structure plus band-limited noise. On top of it the generator can plant:

* a fault plane with vertical displacement,
* a chaotic-texture ellipsoid / cylinder (salt-dome analogue, optionally
  drifting laterally per inline),
* a two-texture half-space split (two distinct layered textures).

It also builds the 2D composite-image corpus used to exercise the
weakly-supervised pixel annotation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import GeometryError
from .volume import GroundTruth, SeismicVolume


@dataclass
class FaultSpec:
    """Plane crossline = x0 + slope_inline*i + slope_sample*t, displaced by
    ``displacement`` samples on the high-crossline side."""
    x0: float
    displacement: float
    slope_inline: float = 0.0
    slope_sample: float = 0.0


@dataclass
class EllipsoidSpec:
    """Chaotic-texture body. radius_inline = inf gives a cylinder along the
    inline axis; ``drift`` moves the crossline center per inline step."""
    center: tuple[float, float, float]  # (inline, crossline, sample)
    radii: tuple[float, float, float]
    drift: float = 0.0


@dataclass
class TextureSplitSpec:
    """Half-space split along the crossline axis at ``boundary``."""
    boundary: int


@dataclass
class SyntheticSpec:
    shape: tuple[int, int, int]
    seed: int
    sample_interval: float = 4000.0
    noise_level: float = 0.02
    fault: FaultSpec | None = None
    ellipsoid: EllipsoidSpec | None = None
    texture_split: TextureSplitSpec | None = None
    extras: dict = field(default_factory=dict)


def _bandpassed_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Zero-mean band-limited noise, unit-ish RMS."""
    white = rng.standard_normal(shape)
    band = gaussian_filter(white, 1.0) - gaussian_filter(white, 3.0)
    rms = np.sqrt(np.mean(band ** 2))
    return band / max(rms, 1e-12)


def layered_field(rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
    """Sum-of-sinusoids reflector stack evaluated at (possibly shifted)
    sample coordinates ``t`` (any shape)."""
    out = np.zeros_like(t, dtype=np.float64)
    for _ in range(6):
        freq = rng.uniform(0.05, 0.22)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.4, 1.0)
        out += amp * np.sin(2 * np.pi * freq * t + phase)
    return out


def layered_patch(shape: tuple[int, int], seed: int = 0,
                  freq: float = 0.12, phase: float = 0.0) -> np.ndarray:
    """Horizontally layered sinusoid patch (rows = depth)."""
    rows = np.arange(shape[0], dtype=np.float64)
    col = np.sin(2 * np.pi * freq * rows + phase)
    rng = np.random.default_rng(seed)
    jitter = 0.05 * rng.standard_normal(shape)
    return (col[:, None] + jitter).astype(np.float64)


def noise_patch(shape: tuple[int, int], seed: int = 0) -> np.ndarray:
    """Band-passed noise patch (the chaotic texture analogue)."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(shape)
    band = gaussian_filter(white, 1.0) - gaussian_filter(white, 3.0)
    rms = np.sqrt(np.mean(band ** 2))
    return band / max(rms, 1e-12)


def generate_synthetic(spec: SyntheticSpec) -> tuple[SeismicVolume, GroundTruth]:
    """Build the volume described by ``spec``. Deterministic given the seed."""
    ni, nx, ns = spec.shape
    if min(ni, nx, ns) < 1:
        raise GeometryError(f"invalid dimensions {spec.shape}")
    rng = np.random.default_rng(spec.seed)

    ii = np.arange(ni, dtype=np.float64)[:, None, None]
    xx = np.arange(nx, dtype=np.float64)[None, :, None]
    tt = np.arange(ns, dtype=np.float64)[None, None, :]

    # gentle lateral structure so neighboring traces are similar, not equal
    shift = (1.0 * np.sin(2 * np.pi * ii / max(ni, 2) * 1.3)
             + 0.7 * np.sin(2 * np.pi * xx / max(nx, 2) * 0.9))

    labels = np.zeros(spec.shape, dtype=np.uint8)
    class_names = ["background"]
    planted: dict = {}

    t_eff = tt + shift
    if spec.fault is not None:
        fl = spec.fault
        if fl.displacement == 0:
            raise GeometryError("zero-displacement fault is undetectable")
        x_plane = fl.x0 + fl.slope_inline * ii + fl.slope_sample * tt
        if x_plane.max() < 0 or x_plane.min() > nx - 1:
            raise GeometryError("fault plane lies outside the volume")
        t_eff = t_eff + np.where(xx > x_plane, fl.displacement, 0.0)
        class_names.append("fault")
        fault_id = len(class_names) - 1
        dist = np.abs(np.broadcast_to(xx, spec.shape)
                      - np.broadcast_to(x_plane, spec.shape))
        labels[dist <= 0.5] = fault_id
        planted["fault_plane"] = {
            "x0": fl.x0, "slope_inline": fl.slope_inline,
            "slope_sample": fl.slope_sample, "displacement": fl.displacement,
        }

    amps = layered_field(rng, np.broadcast_to(t_eff, spec.shape).copy())
    if spec.noise_level > 0:
        amps += spec.noise_level * _bandpassed_noise(rng, spec.shape)

    if spec.texture_split is not None:
        b = spec.texture_split.boundary
        if not 0 < b < nx:
            raise GeometryError(f"texture boundary {b} outside (0, {nx})")
        # second laterally-smooth layered texture (fresh reflector stack)
        tex_b = layered_field(rng, np.broadcast_to(t_eff, spec.shape).copy())
        if spec.noise_level > 0:
            tex_b += spec.noise_level * _bandpassed_noise(rng, spec.shape)
        mask = np.broadcast_to(xx, spec.shape) >= b
        amps = np.where(mask, tex_b, amps)
        class_names.append("texture_b")
        labels[mask] = len(class_names) - 1
        planted["texture_split"] = {"axis": "crossline", "boundary": b}

    if spec.ellipsoid is not None:
        el = spec.ellipsoid
        ci, cx, ct = el.center
        ri, rx, rt = el.radii
        if not (0 <= ci < ni or np.isinf(ri)) or not 0 <= cx < nx \
                or not 0 <= ct < ns:
            raise GeometryError("ellipsoid center outside the volume")
        cx_i = cx + el.drift * (ii - ci)
        if (cx_i + rx).max() > nx - 1 or (cx_i - rx).min() < 0 \
                or ct + rt > ns - 1 or ct - rt < 0:
            raise GeometryError("ellipsoid extends outside the volume")
        term_i = 0.0 if np.isinf(ri) else ((ii - ci) / ri) ** 2
        r2 = term_i + ((xx - cx_i) / rx) ** 2 + ((tt - ct) / rt) ** 2
        mask = np.broadcast_to(r2, spec.shape) <= 1.0
        chaos = _bandpassed_noise(rng, spec.shape)
        rms = np.sqrt(np.mean(amps ** 2))
        amps = np.where(mask, 1.2 * rms * chaos, amps)
        class_names.append("salt")
        labels[mask] = len(class_names) - 1
        planted["ellipsoid"] = {
            "center": tuple(el.center), "radii": tuple(el.radii),
            "drift": el.drift,
        }

    volume = SeismicVolume(amps.astype(np.float32),
                           sample_interval=spec.sample_interval)
    truth = GroundTruth(labels=labels, class_names=class_names,
                        planted_geometry=planted)
    return volume, truth


def stripe_patch(shape: tuple[int, int], orientation: str = "horizontal",
                 period: float = 8.0, dc: float = 0.6,
                 amplitude: float = 0.4) -> np.ndarray:
    """Strictly positive sinusoidal stripe texture, horizontal stripes
    vary along rows, vertical stripes along columns."""
    if orientation not in ("horizontal", "vertical"):
        raise GeometryError(f"unknown stripe orientation {orientation!r}")
    axis = 0 if orientation == "horizontal" else 1
    coord = np.arange(shape[axis], dtype=np.float64)
    wave = dc + amplitude * np.sin(2 * np.pi * coord / period)
    if axis == 0:
        return np.repeat(wave[:, None], shape[1], axis=1)
    return np.repeat(wave[None, :], shape[0], axis=0)


def composite_texture_dataset(n_images: int = 200, side: int = 64,
                              seed: int = 0, weak_amplitude: float = 0.25,
                              noise_level: float = 0.02):
    """Two-class composite corpus for weakly-supervised pixel annotation.

    Each image is split at the middle column: one half carries the
    image-level class texture at full strength, the other half the
    opposing texture attenuated by ``weak_amplitude``. The strong side
    alternates at random. Returns ``(dataset, pixel_truth, seam)`` where
    ``pixel_truth`` has shape (n_images, side, side) and ``seam`` is the
    split column.
    """
    from .labeling import AugmentedDataset

    rng = np.random.default_rng(seed)
    seam = side // 2
    textures = [stripe_patch((side, side), "horizontal"),
                stripe_patch((side, side), "vertical")]
    images, labels, truth = [], [], []
    for i in range(n_images):
        cls = i % 2
        strong, weak = textures[cls], textures[1 - cls]
        amp = rng.uniform(0.9, 1.1)
        img = np.empty((side, side))
        gt = np.empty((side, side), dtype=np.int32)
        if rng.random() < 0.5:
            img[:, :seam] = amp * strong[:, :seam]
            img[:, seam:] = weak_amplitude * amp * weak[:, seam:]
            gt[:, :seam], gt[:, seam:] = cls, 1 - cls
        else:
            img[:, :seam] = weak_amplitude * amp * weak[:, :seam]
            img[:, seam:] = amp * strong[:, seam:]
            gt[:, :seam], gt[:, seam:] = 1 - cls, cls
        img += noise_level * rng.random((side, side))
        images.append(img)
        labels.append(cls)
        truth.append(gt)
    ds = AugmentedDataset.from_images(
        images, labels, ["horizontal", "vertical"])
    return ds, np.stack(truth), seam

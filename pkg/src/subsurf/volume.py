"""Seismic volume containers, 2D sections, and the native "SVOL" cache format.

The SVOL layout is: 4-byte magic ``SVOL``, one version byte, three
little-endian uint32 dims (inline, crossline, samples), then little-endian
IEEE float32 samples in C order. 2D grids are stored with a leading dim of 1.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, GeometryError

SVOL_MAGIC = b"SVOL"
SVOL_VERSION = 1

AXES = ("inline", "crossline", "timeslice")


@dataclass
class SeismicVolume:
    """Dense 3D amplitude grid indexed (inline, crossline, sample)."""

    amplitudes: np.ndarray
    sample_interval: float = 4000.0  # microseconds (time) or depth units
    domain_kind: str = "time"

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.float32)
        if a.ndim != 3:
            raise GeometryError(f"amplitudes must be 3D, got ndim={a.ndim}")
        if min(a.shape) < 1:
            raise GeometryError(f"all dims must be >= 1, got {a.shape}")
        if not np.isfinite(a).all():
            raise DataError("volume contains non-finite amplitudes")
        if self.domain_kind not in ("time", "depth"):
            raise GeometryError(f"unknown domain_kind {self.domain_kind!r}")
        self.amplitudes = a

    @property
    def n_inline(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_crossline(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def n_samples(self) -> int:
        return self.amplitudes.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.amplitudes.shape


@dataclass
class Section2D:
    """A 2D slice of a volume along one axis.

    ``values`` keeps the volume's native index order: for an inline section
    they are (crossline, sample), for a crossline section (inline, sample),
    for a time slice (inline, crossline). ``image`` exposes the depth-major
    (row = sample, col = lateral) view used by the 2D image pipelines.
    """

    axis: str
    index: int
    values: np.ndarray
    provenance: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise GeometryError(f"unknown section axis {self.axis!r}")
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise GeometryError("section values must be 2D")

    @property
    def image(self) -> np.ndarray:
        """Depth-major view (rows increase with sample index)."""
        if self.axis == "timeslice":
            return self.values
        return self.values.T


@dataclass
class GroundTruth:
    """Per-voxel class ids over a volume's geometry plus planted parameters."""

    labels: np.ndarray
    class_names: list[str]
    planted_geometry: dict = field(default_factory=dict)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 3:
            raise GeometryError("labels must be 3D")
        if lab.min() < 0 or lab.max() >= len(self.class_names):
            raise DataError("label values outside [0, n_classes)")
        self.labels = lab.astype(np.uint8)


def extract_section(volume: SeismicVolume, axis: str, index: int) -> Section2D:
    """Slice a volume along one axis. Lossless: see :func:`insert_section`."""
    if axis not in AXES:
        raise GeometryError(f"unknown axis {axis!r}")
    n = {"inline": volume.n_inline,
         "crossline": volume.n_crossline,
         "timeslice": volume.n_samples}[axis]
    if not 0 <= index < n:
        raise GeometryError(f"{axis} index {index} out of range [0, {n})")
    if axis == "inline":
        vals = volume.amplitudes[index, :, :]
    elif axis == "crossline":
        vals = volume.amplitudes[:, index, :]
    else:
        vals = volume.amplitudes[:, :, index]
    return Section2D(axis=axis, index=index, values=vals.copy(),
                     provenance=volume.shape)


def insert_section(volume: SeismicVolume, section: Section2D) -> SeismicVolume:
    """Write a section back into a copy of the volume (round-trip inverse)."""
    amps = volume.amplitudes.copy()
    if section.axis == "inline":
        amps[section.index, :, :] = section.values
    elif section.axis == "crossline":
        amps[:, section.index, :] = section.values
    else:
        amps[:, :, section.index] = section.values
    return SeismicVolume(amps, volume.sample_interval, volume.domain_kind)


def write_svol(grid: np.ndarray | SeismicVolume, path) -> None:
    """Persist a 2D/3D float grid (or volume) in the SVOL cache format."""
    if isinstance(grid, SeismicVolume):
        arr = grid.amplitudes
    else:
        arr = np.asarray(grid, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise GeometryError("SVOL stores 2D or 3D grids")
    with open(path, "wb") as f:
        f.write(SVOL_MAGIC)
        f.write(bytes([SVOL_VERSION]))
        f.write(struct.pack("<III", *arr.shape))
        f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_svol(path) -> np.ndarray:
    """Load an SVOL grid. Returns float32 array of the stored shape."""
    with open(path, "rb") as f:
        head = f.read(17)
        if len(head) < 17 or head[:4] != SVOL_MAGIC:
            raise DataError(f"{path}: not an SVOL file")
        version = head[4]
        if version != SVOL_VERSION:
            raise DataError(f"{path}: unsupported SVOL version {version}")
        dims = struct.unpack("<III", head[5:17])
        count = dims[0] * dims[1] * dims[2]
        raw = f.read(count * 4)
    if len(raw) != count * 4:
        raise DataError(f"{path}: truncated SVOL payload")
    return np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float32)


def read_svol_volume(path, sample_interval=4000.0, domain_kind="time") -> SeismicVolume:
    return SeismicVolume(read_svol(path), sample_interval, domain_kind)

"""Per-voxel structural attributes.

* GTC coherence: per-voxel eigen-ratio of the three unfoldings of a local
  analysis cube, mapped to R/G/B channels.
* Directional Sobel 3x3 kernels (0, 45, 90, -45 degrees).
* 3D gradient of texture (GoT): multi-scale perceptual dissimilarity between
  opposing cubes along each axis. The dissimilarity is the mean magnitude of
  the twice-DFT'd absolute difference cube; DFTs are direct per-axis matrix
  transforms, which is exactly the Kronecker-matrix formulation applied to
  the vectorized cube.
* GLCM texture features (contrast, energy, entropy, homogeneity).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
import scipy.fft as sfft
from scipy.ndimage import correlate

from .errors import DataError, GeometryError
from .multilinear import EPS_COV_PER_ENTRY
from .volume import SeismicVolume

# axis letters follow (t, x, y) = (sample, crossline, inline)
_AXIS_INDEX = {"t": 2, "x": 1, "y": 0}

_CHUNK_VOXELS = 4096


@dataclass
class AttributeVolume:
    """Attribute grid aligned with a SeismicVolume; values shape is
    (channels, n_inline, n_crossline, n_samples)."""

    values: np.ndarray
    kind: str = "attribute"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 3:
            v = v[None]
        if v.ndim != 4:
            raise GeometryError("attribute values must be (channels, i, x, t)")
        if not np.isfinite(v).all():
            raise DataError("attribute volume has non-finite values")
        self.values = v

    @property
    def channels(self) -> int:
        return self.values.shape[0]


# ---------------------------------------------------------------- GTC

def _eig_ratio_batch(b: np.ndarray, eps: float) -> np.ndarray:
    """b: (batch, rows, cols) already column-mean-removed."""
    gram = b @ b.transpose(0, 2, 1)
    tr = np.einsum("bii->b", gram)
    lam = np.linalg.eigvalsh(gram)[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.clip(lam / tr, 0.0, 1.0)
    # snap rank-1 roundoff to exactly 1, matching leading_eig_ratio
    ratio = np.where(ratio > 1.0 - 1e-12, 1.0, ratio)
    return np.where(tr < eps, 1.0, ratio)


def gtc(volume: SeismicVolume, cube: tuple[int, int, int] = (3, 3, 9),
        inlines: slice | None = None) -> AttributeVolume:
    """Generalized tensor coherence; three channels E^(1..3) in [0, 1].

    Borders are replicate-padded. ``inlines`` restricts computation to a
    sub-range of inline planes (channels keep that reduced extent).
    """
    c1, c2, c3 = cube
    shape = volume.shape
    for c, d in zip(cube, shape):
        if c % 2 == 0 or c < 1:
            raise GeometryError(f"cube dims must be odd, got {cube}")
        if c > d:
            raise GeometryError(f"cube {cube} larger than volume {shape}")
    halves = [(c - 1) // 2 for c in cube]
    padded = np.pad(volume.amplitudes.astype(np.float64),
                    [(h, h) for h in halves], mode="edge")
    windows = sliding_window_view(padded, cube)  # (ni, nx, ns, c1, c2, c3)

    inline_ids = range(shape[0])[inlines] if inlines is not None \
        else range(shape[0])
    nx, ns = shape[1], shape[2]
    out = np.empty((3, len(inline_ids), nx, ns), dtype=np.float64)
    eps = EPS_COV_PER_ENTRY * (c1 * c2 * c3)
    for row, i in enumerate(inline_ids):
        w = np.ascontiguousarray(windows[i]).reshape(nx * ns, c1, c2, c3)
        for mode in range(3):
            arr = np.moveaxis(w, 1 + mode, 1).reshape(nx * ns, cube[mode], -1)
            b = arr - arr.mean(axis=2, keepdims=True)
            out[mode, row] = _eig_ratio_batch(b, eps).reshape(nx, ns)
    return AttributeVolume(out, kind="gtc")


def gtc_discontinuity(coherence: AttributeVolume) -> np.ndarray:
    """Scalar discontinuity 1 - min-channel coherence, in [0, 1]."""
    if coherence.channels != 3:
        raise GeometryError("expected a 3-channel GTC volume")
    return 1.0 - coherence.values.min(axis=0)


# ---------------------------------------------------------------- Sobel

# 3x3 kernels in row-down image coordinates. The two diagonal matrices carry
# the published +-45 coefficient patterns; the angle labels are assigned so
# that a ramp perpendicular to the -45 direction nulls the 45-degree filter.
SOBEL_KERNELS = {
    0: np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64),
    90: np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64),
    45: np.array([[0, -1, -2], [1, 0, -1], [2, 1, 0]], dtype=np.float64),
    -45: np.array([[-2, -1, 0], [-1, 0, 1], [0, 1, 2]], dtype=np.float64),
}


def sobel_directional(image: np.ndarray, angle: int) -> np.ndarray:
    """Correlate with the 3x3 kernel for ``angle`` degrees, replicate-padded."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 3:
        raise GeometryError("section must be at least 3x3")
    if angle not in SOBEL_KERNELS:
        raise GeometryError(f"angle must be one of {sorted(SOBEL_KERNELS)}")
    return correlate(img, SOBEL_KERNELS[angle], mode="nearest")


def sobel_magnitude(image: np.ndarray,
                    angles: tuple[int, ...] = (0, 45, 90, -45)) -> np.ndarray:
    """Combined edge magnitude over the requested angles."""
    acc = np.zeros(np.asarray(image).shape, dtype=np.float64)
    for angle in angles:
        acc += sobel_directional(image, angle) ** 2
    return np.sqrt(acc)


# ---------------------------------------------------------------- GoT

@lru_cache(maxsize=16)
def dft_matrix(n: int) -> np.ndarray:
    """Unnormalized DFT matrix exp(-2*pi*i*j*k/n)."""
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(-2j * np.pi * j * k / n)


def _dft3(x: np.ndarray) -> np.ndarray:
    """Separable 3D DFT via per-axis matrix application."""
    out = np.asarray(x, dtype=np.complex128)
    for ax in range(3):
        d = dft_matrix(out.shape[ax])
        out = np.moveaxis(np.tensordot(d, out, axes=([1], [ax])), 0, ax)
    return out


def perceptual_dissimilarity(w_minus: np.ndarray, w_plus: np.ndarray) -> float:
    """Mean magnitude of the twice-transformed absolute difference cube."""
    a = np.asarray(w_minus, dtype=np.float64)
    b = np.asarray(w_plus, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 3:
        raise GeometryError("cubes must be order-3 with equal dims")
    inner = _dft3(np.abs(a - b))
    outer = _dft3(np.abs(inner))
    return float(np.mean(np.abs(outer)))


def _perceptual_batch(diff: np.ndarray) -> np.ndarray:
    """diff: (B, n, n, n) nonnegative. Returns (B,) dissimilarities.

    Same transform as perceptual_dissimilarity, computed with real FFTs:
    the first input is real, so its magnitude spectrum is Hermitian
    symmetric and the second pass is real again; half-spectrum bins are
    mirrored (or weighted, for the final mean) accordingly.
    """
    n = diff.shape[1]
    h = n // 2 + 1
    mag_half = np.abs(sfft.rfftn(diff, axes=(1, 2, 3)))
    mag = np.empty_like(diff)
    mag[:, :, :, :h] = mag_half
    rev = (n - np.arange(n)) % n
    mag[:, :, :, h:] = mag_half[:, rev][:, :, rev][:, :, :, (n - np.arange(h, n)) % n]
    outer_half = np.abs(sfft.rfftn(mag, axes=(1, 2, 3)))
    weights = np.full(h, 2.0, dtype=diff.dtype)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return (outer_half * weights).sum(axis=(1, 2, 3),
                                      dtype=np.float64) / n ** 3


@dataclass
class GoTParams:
    scales: tuple[int, ...] = (9, 13, 17)
    weights: tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3)
    axes: tuple[str, ...] = ("t", "x", "y")

    def __post_init__(self):
        if not self.scales or len(self.scales) != len(self.weights):
            raise GeometryError("scales and weights must align and be nonempty")
        if any(n % 2 == 0 or n < 3 for n in self.scales):
            raise GeometryError(f"scales must be odd and >= 3, got {self.scales}")
        if list(self.scales) != sorted(self.scales):
            raise GeometryError("scales must be ascending")
        if any(w < 0 for w in self.weights) or \
                abs(sum(self.weights) - 1.0) > 1e-9:
            raise GeometryError("weights must be nonnegative and sum to 1")
        if not self.axes or any(a not in _AXIS_INDEX for a in self.axes):
            raise GeometryError(f"axes must be a nonempty subset of t/x/y")


def got3d(volume: SeismicVolume, params: GoTParams | None = None) -> AttributeVolume:
    """Multi-scale 3D gradient of texture, one nonnegative channel.

    For each voxel, axis i and scale n, the two n^3 cubes immediately
    adjacent on either side along i (replicate-padded) are compared with the
    perceptual dissimilarity; per-axis sums combine in quadrature.
    """
    params = params or GoTParams()
    shape = volume.shape
    if max(params.scales) > min(shape):
        raise GeometryError(
            f"max scale {max(params.scales)} does not fit volume {shape}")
    # single precision in the bulk path: per-cube dissimilarities are
    # accumulated in double, and the values only steer peak localization
    vol = volume.amplitudes.astype(np.float32)
    axis_sums = np.zeros((len(params.axes),) + shape, dtype=np.float64)

    for ai, axis_name in enumerate(params.axes):
        a = _AXIS_INDEX[axis_name]
        for n, w in zip(params.scales, params.weights):
            half = (n - 1) // 2
            widths = [(half, half)] * 3
            widths[a] = (n, n)
            padded = np.pad(vol, widths, mode="edge")
            # the element-wise gap between a voxel's leading and trailing
            # cubes is itself a window of one shifted-difference volume
            sl_lo = [slice(None)] * 3
            sl_hi = [slice(None)] * 3
            sl_lo[a] = slice(0, padded.shape[a] - (n + 1))
            sl_hi[a] = slice(n + 1, None)
            dvol = np.abs(padded[tuple(sl_lo)] - padded[tuple(sl_hi)])
            windows = sliding_window_view(dvol, (n, n, n))
            # copy windows in small blocks; flattening the strided view in
            # one go would materialize every window at once
            d_vals = np.empty(shape, dtype=np.float64)
            cols = max(1, _CHUNK_VOXELS // shape[2])
            for i0 in range(shape[0]):
                for j0 in range(0, shape[1], cols):
                    j1 = min(j0 + cols, shape[1])
                    diff = np.ascontiguousarray(windows[i0, j0:j1]) \
                        .reshape(-1, n, n, n)
                    d_vals[i0, j0:j1] = _perceptual_batch(diff) \
                        .reshape(j1 - j0, shape[2])
            axis_sums[ai] += w * d_vals

    g = np.sqrt(np.sum(axis_sums ** 2, axis=0))
    return AttributeVolume(g[None], kind="got")


# ---------------------------------------------------------------- GLCM

def glcm_matrix(window: np.ndarray, levels: int,
                offset: tuple[int, int]) -> np.ndarray:
    """Normalized gray-level co-occurrence probabilities for one offset."""
    img = np.asarray(window, dtype=np.float64)
    if levels < 2:
        raise GeometryError("levels must be >= 2")
    dr, dc = offset
    if abs(dr) >= img.shape[0] or abs(dc) >= img.shape[1]:
        raise GeometryError(f"offset {offset} too large for window {img.shape}")
    lo, hi = img.min(), img.max()
    if hi > lo:
        q = np.minimum((img - lo) / (hi - lo) * levels, levels - 1).astype(int)
    else:
        q = np.zeros(img.shape, dtype=int)  # range collapse: single bin
    r0 = slice(max(0, -dr), img.shape[0] - max(0, dr))
    c0 = slice(max(0, -dc), img.shape[1] - max(0, dc))
    r1 = slice(max(0, dr), img.shape[0] + min(0, dr))
    c1 = slice(max(0, dc), img.shape[1] + min(0, dc))
    src = q[r0, c0].ravel()
    dst = q[r1, c1].ravel()
    counts = np.zeros((levels, levels), dtype=np.float64)
    np.add.at(counts, (src, dst), 1.0)
    return counts / counts.sum()


def glcm_features(window: np.ndarray, levels: int = 16,
                  offsets: tuple[tuple[int, int], ...] =
                  ((0, 1), (1, 0), (1, 1), (1, -1))) -> np.ndarray:
    """Contrast, energy, entropy, homogeneity per offset, concatenated."""
    feats = []
    idx = np.arange(levels)
    di = idx[:, None] - idx[None, :]
    for offset in offsets:
        p = glcm_matrix(window, levels, offset)
        contrast = float(np.sum(p * di ** 2))
        energy = float(np.sum(p ** 2))
        nz = p[p > 0]
        entropy = float(-np.sum(nz * np.log2(nz)))
        homogeneity = float(np.sum(p / (1.0 + np.abs(di))))
        feats.extend([contrast, energy, entropy, homogeneity])
    return np.asarray(feats, dtype=np.float64)

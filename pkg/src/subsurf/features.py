"""Texture feature vectors and similarity retrieval.

The default extractor decomposes a patch with an oriented multi-scale
band-pass filter bank (log-Gabor radial profiles, 3 scales x 4 orientations,
plus a low-pass residual) and concatenates the top singular values of each
subband coefficient grid. The extractor interface is pluggable so an
alternative directional transform backend can be swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attributes import glcm_features
from .errors import DataError, GeometryError


@dataclass(frozen=True)
class FeatureConfig:
    n_scales: int = 3
    n_orientations: int = 4
    top_singular: int = 3
    include_glcm: bool = False
    glcm_levels: int = 16
    glcm_offsets: tuple[tuple[int, int], ...] = ((0, 1), (1, 0), (1, 1), (1, -1))
    min_patch_side: int = 32


_MASK_CACHE: dict[tuple, list[np.ndarray]] = {}


def _filter_bank(shape: tuple[int, int], n_scales: int,
                 n_orientations: int) -> list[np.ndarray]:
    """Frequency-domain subband masks; last entry is the low-pass residual."""
    key = (shape, n_scales, n_orientations)
    if key in _MASK_CACHE:
        return _MASK_CACHE[key]
    fy = np.fft.fftfreq(shape[0])[:, None]
    fx = np.fft.fftfreq(shape[1])[None, :]
    rho = np.sqrt(fx ** 2 + fy ** 2)
    theta = np.arctan2(fy, fx)
    masks = []
    sigma_r = 0.55
    sigma_t = np.pi / n_orientations / 1.2
    with np.errstate(divide="ignore"):
        log_rho = np.where(rho > 0, np.log(rho), -np.inf)
    for s in range(n_scales):
        f_c = 0.25 / (2 ** s)
        radial = np.exp(-(log_rho - np.log(f_c)) ** 2 / (2 * sigma_r ** 2))
        radial[rho == 0] = 0.0
        for k in range(n_orientations):
            t0 = k * np.pi / n_orientations
            dt = np.angle(np.exp(1j * (theta - t0)))
            angular = np.exp(-dt ** 2 / (2 * sigma_t ** 2))
            masks.append(radial * angular)
    lowpass = np.exp(-(rho / 0.04) ** 4)
    masks.append(lowpass)
    _MASK_CACHE[key] = masks
    return masks


def texture_feature_vector(patch: np.ndarray,
                           config: FeatureConfig | None = None) -> np.ndarray:
    """Nonnegative feature vector of subband singular values (optionally
    with GLCM features appended)."""
    config = config or FeatureConfig()
    p = np.asarray(patch, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise GeometryError("patch must be square")
    if p.shape[0] < config.min_patch_side:
        raise GeometryError(
            f"patch side {p.shape[0]} below minimum {config.min_patch_side}")
    if not np.isfinite(p).all():
        raise DataError("patch has non-finite values")
    spectrum = np.fft.fft2(p)
    feats = []
    for mask in _filter_bank(p.shape, config.n_scales, config.n_orientations):
        coeff = np.fft.ifft2(spectrum * mask)
        sv = np.linalg.svd(coeff, compute_uv=False)
        feats.append(sv[:config.top_singular])
    vec = np.concatenate(feats)
    if config.include_glcm:
        vec = np.concatenate([vec, glcm_features(p, config.glcm_levels,
                                                 config.glcm_offsets)])
    return vec


def czekanowski_similarity(v1: np.ndarray, v2: np.ndarray) -> float:
    """1 - |v1 - v2|_1 / |v1 + v2|_1 for nonnegative vectors; in [0, 1].

    Two all-zero vectors are identical by convention (similarity 1)."""
    a = np.asarray(v1, dtype=np.float64)
    b = np.asarray(v2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise GeometryError("feature vectors must be 1D of equal length")
    if (a < 0).any() or (b < 0).any():
        raise DataError("feature vectors must be nonnegative")
    denom = float(np.sum(a + b))
    if denom == 0.0:
        return 1.0
    # single division so simple ratios (e.g. 4/6) come out exact
    sim = (denom - float(np.sum(np.abs(a - b)))) / denom
    return float(min(max(sim, 0.0), 1.0))


def retrieve_similar(exemplar: np.ndarray, corpus: list[np.ndarray],
                     k: int) -> list[tuple[int, float]]:
    """Top-k corpus indices by descending similarity; ties break toward the
    lower corpus index."""
    if len(corpus) == 0:
        raise DataError("empty corpus")
    if not 1 <= k <= len(corpus):
        raise GeometryError(f"k={k} outside [1, {len(corpus)}]")
    scores = np.array([czekanowski_similarity(exemplar, v) for v in corpus])
    order = np.lexsort((np.arange(len(corpus)), -scores))
    return [(int(i), float(scores[i])) for i in order[:k]]


@dataclass
class CzekanowskiKNN:
    """k-nearest-neighbor classifier under Czekanowski similarity.

    Majority vote over the top k; ties resolve to the single most similar
    neighbor's label."""
    k: int = 5
    _features: list[np.ndarray] = field(default_factory=list)
    _labels: np.ndarray | None = None

    def fit(self, features: list[np.ndarray], labels) -> "CzekanowskiKNN":
        if len(features) == 0:
            raise DataError("cannot fit on an empty training set")
        self._features = [np.asarray(f, dtype=np.float64) for f in features]
        self._labels = np.asarray(labels, dtype=int)
        return self

    @property
    def trained(self) -> bool:
        return self._labels is not None

    def predict(self, vec: np.ndarray) -> int:
        if not self.trained:
            raise DataError("classifier is not trained")
        top = retrieve_similar(vec, self._features,
                               min(self.k, len(self._features)))
        votes = np.bincount([self._labels[i] for i, _ in top])
        winners = np.flatnonzero(votes == votes.max())
        if len(winners) == 1:
            return int(winners[0])
        return int(self._labels[top[0][0]])

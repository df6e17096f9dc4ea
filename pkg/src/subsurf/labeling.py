"""Weakly-supervised labeling: grayscale-adapted SLIC over-segmentation,
segment classification, and volume labeling.

SLIC here clusters in (gray, grad_x, grad_y, row, col): the two gradient
channels stand in for the A/B color channels of the original formulation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import label as cc_label

from .errors import DataError, GeometryError
from .features import CzekanowskiKNN, FeatureConfig, texture_feature_vector
from .volume import SeismicVolume, Section2D, extract_section, read_svol, \
    write_svol


@dataclass
class SuperpixelMap:
    """Dense per-pixel segment ids; ids are contiguous from 0."""
    labels: np.ndarray
    segment_count: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int32)
        ids = np.unique(lab)
        if lab.min() < 0 or len(ids) != self.segment_count or \
                ids[-1] != self.segment_count - 1:
            raise DataError("segment ids must be dense in [0, segment_count)")
        self.labels = lab

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in range(self.segment_count)}
        lab = self.labels
        for a, b in ((lab[:-1, :], lab[1:, :]), (lab[:, :-1], lab[:, 1:])):
            diff = a != b
            for x, y in zip(a[diff].ravel(), b[diff].ravel()):
                adj[int(x)].add(int(y))
                adj[int(y)].add(int(x))
        return adj


def _standardize(channel: np.ndarray) -> np.ndarray:
    # zero-variance channels contribute nothing (constant-section fallback)
    std = channel.std()
    if std < 1e-12:
        return np.zeros_like(channel)
    return (channel - channel.mean()) / std


def _enforce_connectivity(labels: np.ndarray, n_centers: int) -> np.ndarray:
    """Keep the largest connected piece per segment id; merge orphans into
    the dominant 4-neighbor."""
    out = -np.ones_like(labels)
    for sid in range(n_centers):
        comp, n = cc_label(labels == sid)
        if n == 0:
            continue
        sizes = np.bincount(comp.ravel())[1:]
        out[comp == (int(np.argmax(sizes)) + 1)] = sid
    # flood-fill leftovers from already-assigned neighbors
    while (out < 0).any():
        changed = False
        holes = np.argwhere(out < 0)
        for r, c in holes:
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < out.shape[0] and 0 <= cc < out.shape[1] \
                        and out[rr, cc] >= 0:
                    out[r, c] = out[rr, cc]
                    changed = True
                    break
        if not changed:
            out[out < 0] = 0
            break
    # relabel densely
    ids = np.unique(out)
    remap = {int(v): i for i, v in enumerate(ids)}
    dense = np.vectorize(remap.get, otypes=[np.int32])(out)
    return dense


def oversegment_slic_gray(section: Section2D | np.ndarray, n_segments: int,
                          compactness: float = 10.0,
                          n_iter: int = 10) -> SuperpixelMap:
    """SLIC k-means over (gray, grad_x, grad_y, row, col) with grid seeds."""
    img = section.image if isinstance(section, Section2D) else \
        np.asarray(section, dtype=np.float64)
    rows, cols = img.shape
    n_pix = rows * cols
    if not 1 <= n_segments <= n_pix:
        raise GeometryError(f"n_segments {n_segments} outside [1, {n_pix}]")
    if n_segments == 1:
        return SuperpixelMap(np.zeros(img.shape, dtype=np.int32), 1)

    gy, gx = np.gradient(img.astype(np.float64))
    feat = np.stack([_standardize(img), _standardize(gx), _standardize(gy)],
                    axis=-1)
    step = int(np.sqrt(n_pix / n_segments))
    step = max(step, 1)
    seed_r = np.arange(step // 2, rows, step)
    seed_c = np.arange(step // 2, cols, step)
    centers_rc = np.array([(r, c) for r in seed_r for c in seed_c],
                          dtype=np.float64)
    centers_f = feat[centers_rc[:, 0].astype(int),
                     centers_rc[:, 1].astype(int)].copy()
    n_centers = len(centers_rc)
    ratio = compactness / step

    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    assign = np.zeros(img.shape, dtype=np.int32)
    for _ in range(n_iter):
        best = np.full(img.shape, np.inf)
        for ci in range(n_centers):
            r0, c0 = centers_rc[ci]
            r_lo, r_hi = int(max(r0 - 2 * step, 0)), int(min(r0 + 2 * step + 1, rows))
            c_lo, c_hi = int(max(c0 - 2 * step, 0)), int(min(c0 + 2 * step + 1, cols))
            fwin = feat[r_lo:r_hi, c_lo:c_hi]
            d_feat = np.sum((fwin - centers_f[ci]) ** 2, axis=-1)
            d_sp = ((rr[r_lo:r_hi, c_lo:c_hi] - r0) ** 2
                    + (cc[r_lo:r_hi, c_lo:c_hi] - c0) ** 2)
            d = d_feat + (ratio ** 2) * d_sp
            win = best[r_lo:r_hi, c_lo:c_hi]
            better = d < win
            win[better] = d[better]
            assign[r_lo:r_hi, c_lo:c_hi][better] = ci
        for ci in range(n_centers):
            sel = assign == ci
            if sel.any():
                centers_rc[ci] = (rr[sel].mean(), cc[sel].mean())
                centers_f[ci] = feat[sel].mean(axis=0)
    dense = _enforce_connectivity(assign, n_centers)
    return SuperpixelMap(dense, int(dense.max()) + 1)


# ----------------------------------------------------------- datasets

@dataclass
class AugmentedDataset:
    """Nonnegative image matrix (pixels x images) with image-level labels."""
    x: np.ndarray                 # (n_pixels, n_images), entries >= 0
    y: np.ndarray                 # (n_images,) class ids
    class_names: list[str]
    image_shape: tuple[int, int]
    source_ids: list[str] = field(default_factory=list)
    offsets: np.ndarray | None = None  # per-column shift applied to reach 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=int)
        if self.x.ndim != 2 or self.x.shape[1] != len(self.y):
            raise GeometryError("data matrix / label length mismatch")
        if (self.x < 0).any():
            raise DataError("augmented data must be nonnegative")
        n_l = len(self.class_names)
        if self.y.min() < 0 or self.y.max() >= n_l:
            raise DataError("labels outside [0, n_classes)")
        for j in range(n_l):
            if not (self.y == j).any():
                raise DataError(f"class {j} ({self.class_names[j]}) has no "
                                "images")

    @property
    def n_images(self) -> int:
        return self.x.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @classmethod
    def from_images(cls, images: list[np.ndarray], labels, class_names,
                    source_ids=None) -> "AugmentedDataset":
        """Vectorize images column-wise, shifting each to min 0."""
        shape = np.asarray(images[0]).shape
        cols, offs = [], []
        for im in images:
            arr = np.asarray(im, dtype=np.float64)
            if arr.shape != shape:
                raise GeometryError("all images must share a shape")
            off = float(arr.min())
            cols.append((arr - off).ravel())
            offs.append(off)
        return cls(x=np.stack(cols, axis=1), y=np.asarray(labels, dtype=int),
                   class_names=list(class_names), image_shape=tuple(shape),
                   source_ids=list(source_ids or []),
                   offsets=np.asarray(offs))

    def save(self, directory) -> None:
        """Directory of SVOL patches plus a manifest text file."""
        os.makedirs(directory, exist_ok=True)
        lines = []
        for n in range(self.n_images):
            img = self.x[:, n].reshape(self.image_shape)
            name = f"patch_{n:05d}.svol"
            write_svol(img, os.path.join(directory, name))
            src = self.source_ids[n] if n < len(self.source_ids) else "synthetic"
            lines.append(f"{name} {int(self.y[n])} {src} 0 0")
        with open(os.path.join(directory, "manifest.txt"), "w") as f:
            f.write(f"# id class source_volume row col\n")
            f.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, directory, class_names) -> "AugmentedDataset":
        manifest = os.path.join(directory, "manifest.txt")
        images, labels, sources = [], [], []
        with open(manifest) as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                name, cls_id, src, _, _ = line.split()
                images.append(read_svol(os.path.join(directory, name))[0])
                labels.append(int(cls_id))
                sources.append(src)
        return cls.from_images(images, labels, class_names, sources)


# ----------------------------------------------------------- labeling

@dataclass
class LabelVolume:
    labels: np.ndarray  # (n_inline, n_crossline, n_samples) class ids
    class_names: list[str]


def _segment_patch(image: np.ndarray, seg_mask: np.ndarray,
                   min_side: int) -> np.ndarray:
    """Square bounding patch of a segment, replicate-padded to min_side."""
    rs, cs = np.where(seg_mask)
    r0, r1 = rs.min(), rs.max() + 1
    c0, c1 = cs.min(), cs.max() + 1
    side = max(r1 - r0, c1 - c0, min_side)
    rc = (r0 + r1) // 2
    cc = (c0 + c1) // 2
    half = side // 2
    side = 2 * half + (side % 2)
    padded = np.pad(image, side, mode="edge")
    r_start = rc - half + side
    c_start = cc - half + side
    return padded[r_start:r_start + side, c_start:c_start + side]


def label_volume(volume: SeismicVolume, classifier: CzekanowskiKNN,
                 n_segments: int = 64, compactness: float = 10.0,
                 feature_config: FeatureConfig | None = None,
                 axis: str = "inline") -> LabelVolume:
    """Per-section over-segmentation, per-segment classification, and
    propagation of the segment label to all its voxels."""
    if not classifier.trained:
        raise DataError("classifier is not trained")
    config = feature_config or FeatureConfig()
    out = np.zeros(volume.shape, dtype=np.uint8)
    n_axis = {"inline": volume.n_inline,
              "crossline": volume.n_crossline}[axis]
    for idx in range(n_axis):
        section = extract_section(volume, axis, idx)
        img = section.image
        seg = oversegment_slic_gray(section, n_segments, compactness)
        section_labels = np.zeros(img.shape, dtype=np.uint8)
        for sid in range(seg.segment_count):
            mask = seg.labels == sid
            patch = _segment_patch(img, mask, config.min_patch_side)
            vec = texture_feature_vector(patch, config)
            section_labels[mask] = classifier.predict(vec)
        # back to volume order: image rows are samples
        if axis == "inline":
            out[idx] = section_labels.T
        else:
            out[:, idx] = section_labels.T
    return LabelVolume(labels=out, class_names=[])

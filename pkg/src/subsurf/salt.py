"""Salt-dome boundary delineation from GoT maps and boundary tracking via
tensor-subspace learning over reference sections.

Section images are depth-major (row = sample, col = lateral).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_closing, label as cc_label

from .errors import DegenerateInputError, GeometryError
from .multilinear import SubspaceBasis, mpca_fit, subspace_project
from .volume import SeismicVolume, Section2D, extract_section


@dataclass
class BoundaryCurve:
    """Ordered (row, col) boundary points in section image coordinates."""
    points: np.ndarray
    closed: bool
    section_index: int

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise GeometryError("boundary points must be (k, 2)")
        if self.closed and len(self.points) < 3:
            raise GeometryError("closed boundary needs at least 3 points")

    def arc_fractions(self) -> np.ndarray:
        """Normalized cumulative arc length of each point in [0, 1)."""
        pts = self.points
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if self.closed:
            total = seg.sum() + np.linalg.norm(pts[0] - pts[-1])
        else:
            total = seg.sum()
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        return cum / max(total, 1e-12)

    def is_simple(self) -> bool:
        """True when no two non-adjacent segments properly intersect."""
        pts = self.points
        segs = list(zip(pts[:-1], pts[1:]))
        if self.closed:
            segs.append((pts[-1], pts[0]))
        n = len(segs)

        def cross2(u, v):
            return u[0] * v[1] - u[1] * v[0]

        def crosses(a, b):
            (p, q), (r, s) = a, b
            d1 = cross2(q - p, r - p)
            d2 = cross2(q - p, s - p)
            d3 = cross2(s - r, p - r)
            d4 = cross2(s - r, q - r)
            return (d1 * d2 < 0) and (d3 * d4 < 0)

        for i in range(n):
            for j in range(i + 2, n):
                if self.closed and i == 0 and j == n - 1:
                    continue
                if crosses(segs[i], segs[j]):
                    return False
        return True


@dataclass
class BoundaryTensorSet:
    """Per-boundary-point texture tensors stacked across reference sections."""
    tensors: list[np.ndarray]       # each (n_patch, n_patch, n_ref)
    points: np.ndarray              # center-boundary points (k, 2)
    closed: bool
    section_indices: list[int]
    n_patch: int

    @property
    def center_index(self) -> int:
        return len(self.section_indices) // 2


# ----------------------------------------------------------- delineation

_MOORE = [(0, 1), (1, 1), (1, 0), (1, -1),
          (0, -1), (-1, -1), (-1, 0), (-1, 1)]


def moore_contour(mask: np.ndarray) -> np.ndarray:
    """Clockwise outer contour of a connected component (Moore tracing)."""
    pts = np.argwhere(mask)
    if len(pts) == 0:
        raise DegenerateInputError("empty component")
    start = tuple(pts[np.lexsort((pts[:, 1], pts[:, 0]))[0]])
    if len(pts) == 1:
        return np.asarray([start], dtype=np.float64)

    def on(p):
        return (0 <= p[0] < mask.shape[0] and 0 <= p[1] < mask.shape[1]
                and mask[p])

    contour = [start]
    backtrack = (start[0], start[1] - 1)
    current = start
    for _ in range(8 * len(pts) + 8):
        db = (backtrack[0] - current[0], backtrack[1] - current[1])
        k0 = _MOORE.index(db)
        nxt = None
        for step in range(1, 9):
            d = _MOORE[(k0 + step) % 8]
            cand = (current[0] + d[0], current[1] + d[1])
            if on(cand):
                nxt = cand
                backtrack = (current[0] + _MOORE[(k0 + step - 1) % 8][0],
                             current[1] + _MOORE[(k0 + step - 1) % 8][1])
                break
        if nxt is None:
            break
        if nxt == start and len(contour) > 2:
            break
        contour.append(nxt)
        current = nxt
    return np.asarray(contour, dtype=np.float64)


def salt_component(got_map: np.ndarray, theta_rel: float) -> np.ndarray:
    """Thresholded, closed, largest-connected-component salt mask."""
    g = np.asarray(got_map, dtype=np.float64)
    peak = g.max()
    if peak <= 0:
        raise DegenerateInputError("uniform GoT map: no component")
    mask = g >= theta_rel * peak
    if theta_rel < 1.0:
        # pad so closing does not erode at the map borders
        padded = np.pad(mask, 2, mode="constant")
        closed = binary_closing(padded, structure=np.ones((3, 3), dtype=bool))
        mask = closed[2:-2, 2:-2]
    labels, n = cc_label(mask, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        raise DegenerateInputError("no component above threshold")
    sizes = np.bincount(labels.ravel())[1:]
    comp = labels == (int(np.argmax(sizes)) + 1)
    rows = np.any(comp, axis=1)
    cols = np.any(comp, axis=0)
    if rows[0] and rows[-1] and cols[0] and cols[-1]:
        raise DegenerateInputError(
            "component touches all four borders: threshold too low")
    return comp


def delineate_salt_boundary(section: Section2D, got_map: np.ndarray,
                            theta_rel: float = 0.5) -> BoundaryCurve:
    """Trace the outer contour of the dominant high-GoT region."""
    comp = salt_component(got_map, theta_rel)
    contour = moore_contour(comp)
    if len(contour) < 3:
        raise DegenerateInputError("component too small to trace")
    return BoundaryCurve(points=contour, closed=True,
                         section_index=section.index)


# ----------------------------------------------------------- tensor build

def _extract_patch(image: np.ndarray, center: tuple[float, float],
                   n_patch: int) -> np.ndarray:
    half = n_patch // 2
    padded = np.pad(image, half, mode="edge")
    r = int(round(center[0]))
    c = int(round(center[1]))
    r = min(max(r, 0), image.shape[0] - 1)
    c = min(max(c, 0), image.shape[1] - 1)
    return padded[r:r + n_patch, c:c + n_patch].astype(np.float64)


def _corresponding_point(boundary: BoundaryCurve, frac: float) -> np.ndarray:
    fr = boundary.arc_fractions()
    d = np.abs(fr - frac)
    if boundary.closed:
        d = np.minimum(d, 1.0 - d)
    return boundary.points[int(np.argmin(d))]


def build_boundary_tensors(volume: SeismicVolume,
                           reference_boundaries: list[BoundaryCurve],
                           n_patch: int = 11,
                           axis: str = "inline") -> BoundaryTensorSet:
    """Stack per-point patches over the reference sections into texture
    tensors. Points correspond across boundaries by normalized arc length."""
    n_ref = len(reference_boundaries)
    if n_ref < 3 or n_ref % 2 == 0:
        raise GeometryError("need an odd number (>= 3) of reference boundaries")
    if n_patch % 2 == 0 or n_patch < 1:
        raise GeometryError("patch size must be odd")
    indices = [b.section_index for b in reference_boundaries]
    if any(b - a != 1 for a, b in zip(indices, indices[1:])):
        raise GeometryError("reference boundaries must be on consecutive "
                            "sections")
    lengths = [len(b.points) for b in reference_boundaries]
    if max(lengths) > 2 * min(lengths):
        raise GeometryError("boundary lengths differ by more than 2x: "
                            "correspondence unreliable")
    center = reference_boundaries[n_ref // 2]
    images = [extract_section(volume, axis, b.section_index).image
              for b in reference_boundaries]
    fracs = center.arc_fractions()
    tensors = []
    for k, pt in enumerate(center.points):
        patches = []
        for j, (bnd, img) in enumerate(zip(reference_boundaries, images)):
            if j == n_ref // 2:
                target = pt
            else:
                target = _corresponding_point(bnd, fracs[k])
            patches.append(_extract_patch(img, tuple(target), n_patch))
        tensors.append(np.stack(patches, axis=2))
    return BoundaryTensorSet(tensors=tensors, points=center.points.copy(),
                             closed=center.closed, section_indices=indices,
                             n_patch=n_patch)


# ----------------------------------------------------------- tracking

def _group_indices(k: int, total: int, n_side: int, closed: bool) -> list[int]:
    idx = range(k - n_side, k + n_side + 1)
    if closed:
        return [i % total for i in idx]
    return [min(max(i, 0), total - 1) for i in idx]


def _smooth_displacements(disp: np.ndarray, window: int,
                          closed: bool) -> np.ndarray:
    if window <= 1 or len(disp) < 2:
        return disp
    half = window // 2
    out = np.empty_like(disp)
    n = len(disp)
    for i in range(n):
        if closed:
            idx = [(i + d) % n for d in range(-half, half + 1)]
        else:
            idx = [min(max(i + d, 0), n - 1) for d in range(-half, half + 1)]
        out[i] = disp[idx].mean(axis=0)
    return out


def track_salt_boundary(volume: SeismicVolume,
                        tensor_set: BoundaryTensorSet,
                        predicted_index: int,
                        n_group: int = 2,
                        reduced_dims: tuple[int, int, int] = (4, 4, 3),
                        search: int = 5,
                        axis: str = "inline",
                        smooth_window: int = 5) -> BoundaryCurve:
    """Track the center reference boundary onto a predicted section.

    Each point's tensor group fits an MPCA basis; the candidate offset
    whose patch-stack tensor (over the n_ref sections ending at
    predicted_index) projects closest to the point's own projected tensor
    wins. Scoring against the center member (rather than the whole group)
    keeps zero offset optimal on identical sections; the displacement field
    is then smoothed with a moving average, so a zero field reproduces the
    reference boundary exactly.
    """
    n_axis = {"inline": volume.n_inline, "crossline": volume.n_crossline,
              "timeslice": volume.n_samples}[axis]
    if not 0 <= predicted_index < n_axis:
        raise GeometryError(f"predicted index {predicted_index} outside volume")
    n_ref = len(tensor_set.section_indices)
    cand_sections = list(range(predicted_index - n_ref + 1,
                               predicted_index + 1))
    if cand_sections[0] < 0:
        raise GeometryError("not enough sections before the predicted index")
    images = [extract_section(volume, axis, s).image for s in cand_sections]
    rows, cols = images[0].shape

    total = len(tensor_set.tensors)
    tracked = np.empty_like(tensor_set.points)
    disp = np.zeros_like(tensor_set.points)
    degenerate = 0
    for k in range(total):
        members = [np.asarray(tensor_set.tensors[i], dtype=np.float64)
                   for i in _group_indices(k, total, n_group,
                                           tensor_set.closed)]
        basis = mpca_fit(members, reduced_dims)
        if basis.degenerate:
            degenerate += 1
        center_proj = subspace_project(
            np.asarray(tensor_set.tensors[k], dtype=np.float64), basis)
        r0, c0 = tensor_set.points[k]
        best = None
        for dr in range(-search, search + 1):
            for dc in range(-search, search + 1):
                rr, cc = r0 + dr, c0 + dc
                if not (0 <= rr < rows and 0 <= cc < cols):
                    continue
                cand = np.stack([_extract_patch(img, (rr, cc),
                                                tensor_set.n_patch)
                                 for img in images], axis=2)
                pc = subspace_project(cand, basis)
                score = float(np.linalg.norm(pc - center_proj))
                key = (score, abs(dr) + abs(dc), dr, dc)
                if best is None or key < best[0]:
                    best = (key, (dr, dc))
        if best is None:
            raise GeometryError("search window leaves the section at point "
                                f"{k}")
        disp[k] = best[1]
    if degenerate > 0.5 * total:
        raise DegenerateInputError(
            "volume too uniform to track: MPCA degenerate at "
            f"{degenerate}/{total} points")
    disp = _smooth_displacements(disp, smooth_window, tensor_set.closed)
    tracked = tensor_set.points + disp
    return BoundaryCurve(points=tracked, closed=tensor_set.closed,
                         section_index=predicted_index)


def track_salt_sections(volume: SeismicVolume,
                        reference_boundaries: list[BoundaryCurve],
                        predicted_indices: list[int],
                        n_patch: int = 11,
                        n_group: int = 2,
                        reduced_dims: tuple[int, int, int] = (4, 4, 3),
                        search: int = 5,
                        axis: str = "inline") -> list[BoundaryCurve]:
    """Iteratively track forward, re-referencing with each tracked boundary."""
    refs = list(reference_boundaries)
    out = []
    for p in sorted(predicted_indices):
        tensor_set = build_boundary_tensors(volume, refs[-len(refs):],
                                            n_patch, axis)
        curve = track_salt_boundary(volume, tensor_set, p, n_group,
                                    reduced_dims, search, axis)
        out.append(curve)
        refs = refs[1:] + [curve]
    return out

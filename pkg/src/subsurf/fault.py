"""Fault workflow: discontinuity map, Hough line-feature extraction,
geologic false-feature pruning, feature connection, and reference/predicted
section tracking via block matching.

All 2D arrays here use image coordinates: row = depth (sample), col =
lateral position in the section.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .attributes import AttributeVolume, gtc, gtc_discontinuity
from .errors import DegenerateInputError, GeometryError
from .volume import SeismicVolume, extract_section


@dataclass
class HoughParams:
    rho_res: float = 1.0
    theta_res: float = np.deg2rad(1.0)
    theta_range: float = np.deg2rad(30.0)  # from vertical
    min_support: int = 10
    max_gap: float = 3.0
    min_length: float = 8.0


@dataclass
class PruneParams:
    d_out: float | None = None  # None: adaptive, 2x median midpoint distance
    d_merge: float = 5.0
    theta_merge: float = np.deg2rad(5.0)


@dataclass
class TrackParams:
    block: int = 9
    search: int = 4
    max_ref_distance: int = 10


@dataclass
class FaultFeature:
    """A finite line segment extracted from the Hough accumulator."""
    p0: tuple[float, float]  # (row, col), shallow end
    p1: tuple[float, float]  # (row, col), deep end
    rho: float
    theta: float
    support: int

    @property
    def midpoint(self) -> np.ndarray:
        return (np.asarray(self.p0) + np.asarray(self.p1)) / 2.0


@dataclass
class FaultNetwork:
    polylines: list[np.ndarray]        # each (k, 2) of (row, col)
    provenance: list[list[int]]        # contributing feature ids per polyline

    def __post_init__(self):
        for pl in self.polylines:
            if len(pl) < 2:
                raise GeometryError("polylines need at least 2 points")
            rows = np.asarray(pl)[:, 0]
            if not np.all(np.diff(rows) > 0):
                raise GeometryError("polyline not strictly monotone in depth")


def discontinuity_map(source: SeismicVolume | AttributeVolume, axis: str,
                      index: int, cube: tuple[int, int, int] = (3, 3, 9)
                      ) -> np.ndarray:
    """1 - min-channel GTC coherence for one section, in image coords.

    For a raw volume, coherence is computed just for the requested plane
    (neighboring planes contribute through the analysis cube).
    """
    if isinstance(source, SeismicVolume):
        if axis != "inline":
            # slices along other axes reuse the full-volume attribute
            att = gtc(source, cube)
        else:
            if not 0 <= index < source.n_inline:
                raise GeometryError(f"inline {index} out of range")
            att = gtc(source, cube, inlines=slice(index, index + 1))
            disc = gtc_discontinuity(att)[0]
            return disc.T
    else:
        att = source
    disc = gtc_discontinuity(att)
    if axis == "inline":
        return disc[index].T
    if axis == "crossline":
        return disc[:, index].T
    return disc[:, :, index]


def threshold_mask(disc_map: np.ndarray, percentile: float = 90.0) -> np.ndarray:
    """Hard threshold at the given percentile of the discontinuity map."""
    tau = np.percentile(disc_map, percentile)
    return disc_map > tau


def hough_accumulator(mask: np.ndarray, params: HoughParams
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vote mask pixels into (rho, theta) bins restricted near vertical.

    Returns (accumulator, rho_centers, theta_centers). The line model is
    col*cos(theta) + row*sin(theta) = rho, so theta = 0 is a vertical line.
    """
    rows, cols = mask.shape
    thetas = np.arange(-params.theta_range,
                       params.theta_range + params.theta_res / 2,
                       params.theta_res)
    rho_max = float(np.hypot(rows - 1, cols - 1))
    n_rho = int(np.ceil(2 * rho_max / params.rho_res)) + 1
    rhos = -rho_max + params.rho_res * np.arange(n_rho)
    acc = np.zeros((n_rho, len(thetas)), dtype=np.int64)
    pts = np.argwhere(mask)
    if len(pts) == 0:
        return acc, rhos, thetas
    r = pts[:, 0].astype(np.float64)
    c = pts[:, 1].astype(np.float64)
    for j, th in enumerate(thetas):
        rho = c * np.cos(th) + r * np.sin(th)
        bins = np.rint((rho + rho_max) / params.rho_res).astype(int)
        np.clip(bins, 0, n_rho - 1, out=bins)
        acc[:, j] = np.bincount(bins, minlength=n_rho)
    return acc, rhos, thetas


def _accumulator_peaks(acc: np.ndarray, min_support: int) -> list[tuple[int, int]]:
    """Peaks above min_support with non-maximum suppression in a 3x3
    (rho-bin x theta-bin) neighborhood."""
    from scipy.ndimage import maximum_filter
    local_max = acc == maximum_filter(acc, size=3)
    cand = np.argwhere(local_max & (acc >= min_support))
    order = np.lexsort((cand[:, 1], cand[:, 0], -acc[cand[:, 0], cand[:, 1]]))
    peaks: list[tuple[int, int]] = []
    for idx in order:
        rb, tb = cand[idx]
        if all(abs(rb - pr) > 1 or abs(tb - pt) > 1 for pr, pt in peaks):
            peaks.append((int(rb), int(tb)))
    return peaks


def extract_fault_features(mask: np.ndarray, params: HoughParams | None = None
                           ) -> list[FaultFeature]:
    """Hough voting, peak extraction, and segment walking over the mask."""
    params = params or HoughParams()
    mask = np.asarray(mask, dtype=bool)
    if mask.size and mask.all():
        raise DegenerateInputError("threshold too low: mask is all ones")
    acc, rhos, thetas = hough_accumulator(mask, params)
    peaks = _accumulator_peaks(acc, params.min_support)

    pts = np.argwhere(mask)
    claimed = np.zeros(len(pts), dtype=bool)
    r = pts[:, 0].astype(np.float64)
    c = pts[:, 1].astype(np.float64)
    tol = 0.5 * params.rho_res + 0.5
    features: list[FaultFeature] = []
    for rb, tb in peaks:
        th, rho = thetas[tb], rhos[rb]
        dist = np.abs(c * np.cos(th) + r * np.sin(th) - rho)
        sel = np.flatnonzero((dist <= tol) & ~claimed)
        if len(sel) < 2:
            continue
        # walk along the line direction with gap tolerance
        proj = -c[sel] * np.sin(th) + r[sel] * np.cos(th)
        order = np.argsort(proj, kind="stable")
        sel, proj = sel[order], proj[order]
        breaks = np.flatnonzero(np.diff(proj) > params.max_gap)
        starts = np.concatenate(([0], breaks + 1))
        stops = np.concatenate((breaks + 1, [len(sel)]))
        for a, b in zip(starts, stops):
            run = sel[a:b]
            if len(run) < 2 or proj[b - 1] - proj[a] < params.min_length:
                continue
            ends = pts[[run[0], run[-1]]]
            if ends[0][0] > ends[1][0]:
                ends = ends[::-1]
            features.append(FaultFeature(
                p0=(float(ends[0][0]), float(ends[0][1])),
                p1=(float(ends[1][0]), float(ends[1][1])),
                rho=float(rho), theta=float(th), support=int(len(run))))
            claimed[run] = True
    return features


def _tls_distances(points: np.ndarray) -> np.ndarray:
    """Perpendicular distances to the total-least-squares line fit."""
    center = points.mean(axis=0)
    d = points - center
    if len(points) < 2 or np.allclose(d, 0):
        return np.zeros(len(points))
    _, _, vt = np.linalg.svd(d, full_matrices=False)
    normal = vt[-1]
    return np.abs(d @ normal)


def prune_false_features(features: list[FaultFeature],
                         prune: PruneParams | None = None
                         ) -> list[FaultFeature]:
    """Discard outliers relative to the midpoint line fit, merge neighboring
    near-duplicate features."""
    prune = prune or PruneParams()
    if len(features) <= 1:
        return list(features)
    mids = np.array([f.midpoint for f in features])
    dist = _tls_distances(mids)
    d_out = prune.d_out if prune.d_out is not None else 2.0 * np.median(dist)
    keep = np.flatnonzero(dist <= d_out + 1e-9)
    if len(keep) == 0:
        warnings.warn("all fault features pruned as outliers")
        return []

    # merge groups: close midpoints and near-equal orientation
    parent = {int(i): int(i) for i in keep}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    kept = [int(i) for i in keep]
    for a_pos, i in enumerate(kept):
        for j in kept[a_pos + 1:]:
            dm = np.linalg.norm(mids[i] - mids[j])
            dth = abs(features[i].theta - features[j].theta)
            dth = min(dth, np.pi - dth)
            if dm < prune.d_merge and dth < prune.theta_merge:
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in kept:
        groups.setdefault(find(i), []).append(i)

    merged: list[FaultFeature] = []
    for members in groups.values():
        if len(members) == 1:
            merged.append(features[members[0]])
            continue
        w = np.array([features[i].support for i in members], dtype=np.float64)
        p0 = np.average([features[i].p0 for i in members], axis=0, weights=w)
        p1 = np.average([features[i].p1 for i in members], axis=0, weights=w)
        rho = float(np.average([features[i].rho for i in members], weights=w))
        th = float(np.average([features[i].theta for i in members], weights=w))
        merged.append(FaultFeature(p0=tuple(p0), p1=tuple(p1), rho=rho,
                                   theta=th, support=int(w.sum())))
    merged.sort(key=lambda f: (f.midpoint[0], f.midpoint[1]))
    return merged


def connect_features(features: list[FaultFeature],
                     d_chain: float = 10.0) -> FaultNetwork:
    """Chain depth-sorted features whose endpoint gap is below d_chain."""
    if not features:
        return FaultNetwork([], [])
    order = sorted(range(len(features)),
                   key=lambda i: (features[i].midpoint[0],
                                  features[i].midpoint[1]))
    chains: list[dict] = []  # {'points': [...], 'ids': [...]}
    for fid in order:
        f = features[fid]
        top = np.asarray(f.p0, dtype=np.float64)
        bot = np.asarray(f.p1, dtype=np.float64)
        best = None
        best_gap = d_chain
        for chain in chains:
            gap = float(np.linalg.norm(np.asarray(chain["points"][-1]) - top))
            if gap < best_gap:
                best, best_gap = chain, gap
        if best is None:
            chains.append({"points": [top, bot], "ids": [fid]})
        else:
            for pt in (top, bot):
                if pt[0] > best["points"][-1][0]:
                    best["points"].append(pt)
            best["ids"].append(fid)
    polylines = [np.asarray(c["points"]) for c in chains]
    return FaultNetwork(polylines, [c["ids"] for c in chains])


def detect_faults(volume: SeismicVolume, axis: str, index: int,
                  cube: tuple[int, int, int] = (3, 3, 9),
                  percentile: float = 90.0,
                  hough: HoughParams | None = None,
                  prune: PruneParams | None = None,
                  d_chain: float = 10.0) -> FaultNetwork:
    """Full per-section pipeline: discontinuity -> threshold -> Hough ->
    prune -> connect."""
    disc = discontinuity_map(volume, axis, index, cube)
    mask = threshold_mask(disc, percentile)
    feats = extract_fault_features(mask, hough)
    feats = prune_false_features(feats, prune)
    return connect_features(feats, d_chain)


def _block_match(ref_img: np.ndarray, pred_img: np.ndarray,
                 point: np.ndarray, params: TrackParams) -> np.ndarray:
    """Displacement minimizing SAD over a block; ties favor no motion."""
    half = params.block // 2
    s = params.search
    pad_ref = np.pad(ref_img, half, mode="edge")
    pad_pred = np.pad(pred_img, half + s, mode="edge")
    r0, c0 = int(round(point[0])), int(round(point[1]))
    r0 = min(max(r0, 0), ref_img.shape[0] - 1)
    c0 = min(max(c0, 0), ref_img.shape[1] - 1)
    ref_block = pad_ref[r0:r0 + params.block, c0:c0 + params.block]
    best = None
    for dr in range(-s, s + 1):
        for dc in range(-s, s + 1):
            rr, cc = r0 + s + dr, c0 + s + dc
            cand = pad_pred[rr:rr + params.block, cc:cc + params.block]
            sad = float(np.abs(ref_block - cand).sum())
            key = (sad, abs(dr) + abs(dc), dr, dc)
            if best is None or key < best[0]:
                best = (key, (dr, dc))
    return np.asarray(best[1], dtype=np.float64)


def track_faults_sections(reference: dict[int, FaultNetwork],
                          volume: SeismicVolume,
                          predicted_indices: list[int],
                          axis: str = "inline",
                          params: TrackParams | None = None
                          ) -> dict[int, FaultNetwork]:
    """Transfer reference networks onto predicted sections by block matching
    each polyline point; displaced polylines are outlier-filtered."""
    params = params or TrackParams()
    n_axis = {"inline": volume.n_inline, "crossline": volume.n_crossline,
              "timeslice": volume.n_samples}[axis]
    out: dict[int, FaultNetwork] = {}
    for p in predicted_indices:
        if not 0 <= p < n_axis:
            raise GeometryError(f"predicted index {p} outside volume")
        ref_idx = min(reference, key=lambda r: (abs(r - p), r))
        if abs(ref_idx - p) > params.max_ref_distance:
            raise GeometryError(
                f"no reference within {params.max_ref_distance} sections "
                f"of {p}")
        ref_img = extract_section(volume, axis, ref_idx).image
        pred_img = extract_section(volume, axis, p).image
        polylines, provenance = [], []
        for pl, prov in zip(reference[ref_idx].polylines,
                            reference[ref_idx].provenance):
            disp = np.array([_block_match(ref_img, pred_img, pt, params)
                             for pt in pl])
            moved = np.asarray(pl, dtype=np.float64) + disp
            if len(moved) > 2:
                dist = _tls_distances(moved)
                keep = dist <= 2.0 * np.median(dist) + 1e-9
                if keep.sum() >= 2:
                    moved = moved[keep]
            moved = moved[np.argsort(moved[:, 0], kind="stable")]
            rows = moved[:, 0]
            moved = moved[np.concatenate(([True], np.diff(rows) > 0))]
            if len(moved) >= 2:
                polylines.append(moved)
                provenance.append(list(prov))
        out[p] = FaultNetwork(polylines, provenance)
    return out

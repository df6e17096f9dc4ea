"""Sparsity- and orthogonality-constrained NMF for weakly-supervised
pixel-level annotation.

The factorization minimizes
``|X - WH|_F^2 + l1|W|_F^2 + l2|H|_F^2 + g1|HH^T - B|_F^2`` with W, H >= 0,
via multiplicative updates; basis columns are initialized by per-class
k-means and projected to a target normalized L1/L2 sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from .errors import DataError, GeometryError
from .labeling import AugmentedDataset

EPS_DIV = 1e-12


def hoyer_sparsity(w: np.ndarray) -> float:
    """(sqrt(N) - |w|_1 / |w|_2) / (sqrt(N) - 1), in [0, 1]."""
    v = np.asarray(w, dtype=np.float64).ravel()
    if v.size < 2:
        raise GeometryError("sparsity needs a vector of length >= 2")
    l2 = np.linalg.norm(v)
    if l2 == 0:
        raise DataError("sparsity of the zero vector is undefined")
    n = np.sqrt(v.size)
    return float((n - np.abs(v).sum() / l2) / (n - 1))


def project_to_sparsity(w: np.ndarray, rho_w: float,
                        l2_target: float = 1.0) -> np.ndarray:
    """Closest nonnegative vector with |.|_2 = l2_target and the L1 norm
    implied by the target sparsity (alternating hyperplane/sphere
    projection; the support shrinks until nonnegative)."""
    if not 0.0 < rho_w < 1.0:
        raise GeometryError(f"target sparsity must be in (0, 1), got {rho_w}")
    v = np.asarray(w, dtype=np.float64).ravel().copy()
    n = v.size
    if n < 2:
        raise GeometryError("projection needs a vector of length >= 2")
    l1_target = l2_target * (np.sqrt(n) - rho_w * (np.sqrt(n) - 1.0))

    s = v + (l1_target - v.sum()) / n
    zero = np.zeros(n, dtype=bool)
    for _ in range(n + 1):
        active = ~zero
        m = np.zeros(n)
        m[active] = l1_target / active.sum()
        diff = s - m
        # alpha >= 0 with |m + alpha*(s-m)|_2 = l2_target
        a = float(diff @ diff)
        if a < 1e-300 and active.sum() > 1:
            # s landed on the uniform point: any direction on the L1
            # hyperplane works; deterministically favor the largest input
            j = int(np.argmax(np.where(active, v, -np.inf)))
            diff = np.where(active, -1.0 / active.sum(), 0.0)
            diff[j] += 1.0
            a = float(diff @ diff)
        b = 2.0 * float(m @ diff)
        c = float(m @ m) - l2_target ** 2
        if a < 1e-300:
            s = m
        else:
            disc = max(b * b - 4 * a * c, 0.0)
            alpha = (-b + np.sqrt(disc)) / (2 * a)
            s = m + alpha * diff
        neg = s < 0
        if not neg.any():
            break
        zero |= neg
        s[zero] = 0.0
        active = ~zero
        if not active.any():
            s[int(np.argmax(v))] = l2_target
            break
        s[active] -= (s[active].sum() - l1_target) / active.sum()
    return np.maximum(s, 0.0)


@dataclass
class NMFModel:
    w: np.ndarray                   # (n_pixels, n_features)
    h: np.ndarray                   # (n_features, n_images)
    q: np.ndarray                   # (n_features, n_classes), one 1 per row
    b: np.ndarray                   # (n_features, n_features) positive
    hyperparams: dict = field(default_factory=dict)
    objective_log: list[float] = field(default_factory=list)
    converged: bool = True


def sonmf_objective(x, w, h, lam1, lam2, gamma1, b) -> float:
    rec = np.linalg.norm(x - w @ h, "fro") ** 2
    reg = lam1 * np.linalg.norm(w, "fro") ** 2 \
        + lam2 * np.linalg.norm(h, "fro") ** 2
    orth = gamma1 * np.linalg.norm(h @ h.T - b, "fro") ** 2
    return float(rec + reg + orth)


def sonmf_iterate(x: np.ndarray, w: np.ndarray, h: np.ndarray,
                  b: np.ndarray, lam1: float, lam2: float, gamma1: float,
                  max_iter: int, tol: float,
                  normalize_h: bool = True) -> tuple[np.ndarray, np.ndarray,
                                                     list[float], bool]:
    """Run the multiplicative updates; returns (W, H, objective log,
    converged flag). W and H stay entrywise nonnegative by construction."""
    w = w.copy()
    h = h.copy()
    log = []
    converged = False
    bsym = b + b.T
    for _ in range(max_iter):
        w = w * (x @ h.T) / np.maximum(w @ h @ h.T + lam1 * w, EPS_DIV)
        h = h * (w.T @ x + gamma1 * bsym @ h) / np.maximum(
            w.T @ w @ h + gamma1 * h @ h.T @ h + lam2 * h, EPS_DIV)
        if normalize_h:
            norms = np.linalg.norm(h, axis=0)
            h = h / np.maximum(norms, EPS_DIV)
        log.append(sonmf_objective(x, w, h, lam1, lam2, gamma1, b))
        if len(log) > 1:
            prev = log[-2]
            if abs(prev - log[-1]) / max(abs(prev), EPS_DIV) < tol:
                converged = True
                break
    return w, h, log, converged


def nmf_pixel_annotation(data: AugmentedDataset,
                         n_features_per_class: int = 8,
                         rho_w: float = 0.85,
                         lam1: float = 0.1, lam2: float = 0.1,
                         gamma1: float = 1.0,
                         max_iter: int = 300, tol: float = 1e-5,
                         seed: int = 0) -> tuple[np.ndarray, NMFModel]:
    """Map image-level labels to pixel-level labels.

    Returns (pixel labels of shape (n_pixels, n_images), fitted model).
    """
    x = data.x
    n_classes = data.n_classes
    n_feat = n_classes * n_features_per_class
    if n_feat > data.n_images:
        raise GeometryError(
            f"{n_feat} features exceed the {data.n_images} images")
    rng = np.random.default_rng(seed)

    # per-class k-means centroids as initial basis columns
    w_cols, q_rows = [], []
    for j in range(n_classes):
        cols = x[:, data.y == j]
        if cols.shape[1] < n_features_per_class:
            raise DataError(
                f"class {j} has {cols.shape[1]} images, fewer than "
                f"{n_features_per_class} requested features")
        km = KMeans(n_clusters=n_features_per_class, n_init=4,
                    random_state=int(rng.integers(0, 2 ** 31)))
        km.fit(cols.T)
        for centroid in km.cluster_centers_:
            w_cols.append(np.maximum(centroid, 0.0))
            q_rows.append(j)
    w0 = np.stack(w_cols, axis=1)
    if rho_w is not None:
        for i in range(w0.shape[1]):
            w0[:, i] = project_to_sparsity(w0[:, i], rho_w, 1.0)
    h0 = rng.uniform(0.1, 1.0, size=(n_feat, data.n_images))
    b = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=(n_feat, n_feat))
    q = np.zeros((n_feat, n_classes))
    q[np.arange(n_feat), q_rows] = 1.0

    w, h, log, converged = sonmf_iterate(x, w0, h0, b, lam1, lam2, gamma1,
                                         max_iter, tol)
    model = NMFModel(w=w, h=h, q=q, b=b,
                     hyperparams={"n_features_per_class": n_features_per_class,
                                  "rho_w": rho_w, "lambda1": lam1,
                                  "lambda2": lam2, "gamma1": gamma1,
                                  "max_iter": max_iter, "tol": tol,
                                  "seed": seed},
                     objective_log=log, converged=converged)

    labels = np.empty((x.shape[0], data.n_images), dtype=np.int32)
    for n in range(data.n_images):
        likelihood = w @ (q * h[:, n][:, None])  # (n_pixels, n_classes)
        labels[:, n] = np.argmax(likelihood, axis=1)
    return labels, model

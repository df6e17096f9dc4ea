"""Order-3 tensor algebra: unfolding, mode products, covariance eigen-ratio,
and multilinear PCA over tensor groups.

Unfolding uses the cyclic column convention: the mode-i unfolding has rows
indexed by i, and columns sweep the remaining two indices with the next
cyclic index varying fastest. The eigen-ratio is invariant to the column
order, but the convention is pinned for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, GeometryError

#: Tr(C) below EPS_COV_PER_ENTRY * n_entries counts as perfectly coherent.
EPS_COV_PER_ENTRY = 1e-12


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise GeometryError(f"mode must be 1, 2 or 3, got {mode}")
    return mode - 1


def unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding, shape (I_mode, prod of the other dims)."""
    t = np.asarray(tensor)
    if t.ndim != 3:
        raise GeometryError("unfold expects an order-3 tensor")
    m = _check_mode(mode)
    # transpose so the next cyclic axis lands last (fastest in C order)
    perm = (m, (m + 2) % 3, (m + 1) % 3)
    return t.transpose(perm).reshape(t.shape[m], -1)


def fold(matrix: np.ndarray, mode: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold` for the given full tensor dims."""
    m = _check_mode(mode)
    mat = np.asarray(matrix)
    other = (dims[(m + 2) % 3], dims[(m + 1) % 3])
    if mat.shape != (dims[m], other[0] * other[1]):
        raise GeometryError(
            f"matrix shape {mat.shape} inconsistent with dims {dims} mode {mode}")
    perm = (m, (m + 2) % 3, (m + 1) % 3)
    inv = np.argsort(perm)
    return mat.reshape(dims[m], *other).transpose(inv)


def mode_product(tensor: np.ndarray, matrix: np.ndarray, mode: int) -> np.ndarray:
    """i-mode product: replaces I_mode by the matrix's row count."""
    t = np.asarray(tensor)
    mat = np.asarray(matrix)
    m = _check_mode(mode)
    if mat.ndim != 2 or mat.shape[1] != t.shape[m]:
        raise GeometryError(
            f"matrix shape {mat.shape} incompatible with tensor dim "
            f"{t.shape[m]} at mode {mode}")
    return np.moveaxis(np.tensordot(mat, t, axes=([1], [m])), 0, m)


def leading_eig_ratio(matrix: np.ndarray) -> float:
    """largest eigenvalue of the column-mean-removed covariance over its trace.

    The covariance is C = (A - 1 (x) mu)^T (A - 1 (x) mu); the ratio is
    computed on the Gram matrix of the smaller side (same nonzero spectrum).
    Returns exactly 1.0 in the degenerate perfectly-coherent case.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise GeometryError("leading_eig_ratio expects a nonempty matrix")
    if not np.isfinite(a).all():
        raise DataError("matrix has non-finite entries")
    b = a - a.mean(axis=1, keepdims=True)
    trace = float(np.sum(b * b))
    if trace < EPS_COV_PER_ENTRY * a.size:
        return 1.0
    if b.shape[0] <= b.shape[1]:
        gram = b @ b.T
    else:
        gram = b.T @ b
    lam1 = float(np.linalg.eigvalsh(gram)[-1])
    ratio = lam1 / trace
    # rank-1 inputs land within eigensolver roundoff of 1; snap them
    if ratio > 1.0 - 1e-12:
        return 1.0
    return float(max(ratio, 0.0))


@dataclass
class SubspaceBasis:
    """Per-mode projection matrices with orthonormal rows."""
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    degenerate: bool = False
    variance_log: list[float] = field(default_factory=list)

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.u1, self.u2, self.u3


def subspace_project(tensor: np.ndarray, basis: SubspaceBasis) -> np.ndarray:
    """Chained mode products with the three basis matrices."""
    out = np.asarray(tensor, dtype=np.float64)
    for mode, u in enumerate(basis.matrices(), start=1):
        out = mode_product(out, u, mode)
    return out


def _mode_scatter(tensors: list[np.ndarray], mode: int,
                  projections: list[np.ndarray] | None = None) -> np.ndarray:
    """Sum over members of A_(mode) A_(mode)^T, optionally after projecting
    the other two modes."""
    scatter = None
    for t in tensors:
        if projections is not None:
            for other in (1, 2, 3):
                if other != mode:
                    t = mode_product(t, projections[other - 1], other)
        u = unfold(t, mode)
        g = u @ u.T
        scatter = g if scatter is None else scatter + g
    return scatter


def mpca_fit(members: list[np.ndarray], reduced_dims: tuple[int, int, int],
             max_iter: int = 20, tol: float = 1e-4) -> SubspaceBasis:
    """Alternating MPCA on a group of equally-sized order-3 tensors.

    Initializes each mode basis from the full-data mode scatter of the
    mean-centered members, then re-estimates each basis from the scatter of
    members projected along the other two modes. Captured variance is
    monotone non-decreasing; iteration stops on relative improvement < tol.
    """
    if len(members) < 2:
        raise GeometryError("MPCA needs at least two member tensors")
    dims = np.asarray(members[0]).shape
    for t in members:
        if np.asarray(t).shape != dims:
            raise GeometryError("all group members must share dims")
    for r, d in zip(reduced_dims, dims):
        if not 1 <= r <= d:
            raise GeometryError(
                f"reduced dims {reduced_dims} exceed tensor dims {dims}")

    mean = np.mean([np.asarray(t, dtype=np.float64) for t in members], axis=0)
    centered = [np.asarray(t, dtype=np.float64) - mean for t in members]
    total = float(sum(np.sum(t * t) for t in centered))
    if total < EPS_COV_PER_ENTRY * len(members) * mean.size:
        basis = SubspaceBasis(
            u1=np.eye(dims[0])[:reduced_dims[0]],
            u2=np.eye(dims[1])[:reduced_dims[1]],
            u3=np.eye(dims[2])[:reduced_dims[2]],
            degenerate=True, variance_log=[0.0])
        return basis

    def top_rows(scatter: np.ndarray, r: int) -> np.ndarray:
        vals, vecs = np.linalg.eigh(scatter)
        return vecs[:, ::-1][:, :r].T

    us = [top_rows(_mode_scatter(centered, mode), reduced_dims[mode - 1])
          for mode in (1, 2, 3)]

    def captured(us_now) -> float:
        basis = SubspaceBasis(*us_now)
        return float(sum(np.sum(subspace_project(t, basis) ** 2)
                         for t in centered))

    log = [captured(us)]
    for _ in range(max_iter):
        for mode in (1, 2, 3):
            scatter = _mode_scatter(centered, mode, projections=us)
            us[mode - 1] = top_rows(scatter, reduced_dims[mode - 1])
        log.append(captured(us))
        prev = log[-2]
        if prev > 0 and (log[-1] - prev) / prev < tol:
            break
    return SubspaceBasis(us[0], us[1], us[2], degenerate=False,
                         variance_log=log)

"""Cyclic Jacobi diagonalisation of small symmetric matrices.

The rotations are applied to a whole stack of matrices at once (any
leading batch shape), so coefficient fields on a grid are diagonalised in a
handful of vectorised sweeps.  Sweep order is fixed, which makes results
bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sym_poly import MAX_DIM, ConeLabel, gamma_k_membership


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending, shape (..., n)
    eigenvectors: np.ndarray  # columns, shape (..., n, n)

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues[..., None, :]) @ np.swapaxes(q, -1, -2)


def symmetric_matrix(a) -> np.ndarray:
    """Validate and return ``a`` as a float array of symmetric matrices.

    Only the upper triangle is read; the lower one is overwritten with it.
    """
    a = np.array(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    n = a.shape[-1]
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    iu = np.triu_indices(n, 1)
    a[..., iu[1], iu[0]] = a[..., iu[0], iu[1]]
    return a


def eigen_decompose(a, max_sweeps: int = 30) -> SpectralDecomposition:
    """Diagonalise symmetric ``a`` (shape ``(..., n, n)``) by cyclic Jacobi.

    Returns ascending eigenvalues and orthonormal eigenvector columns.
    """
    a = symmetric_matrix(a)
    n = a.shape[-1]
    batch = a.shape[:-2]
    a = a.reshape((-1, n, n)).copy()
    q = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.max(np.abs(a), axis=(1, 2))
    scale[scale == 0] = 1.0
    pairs = [(p, r) for p in range(n - 1) for r in range(p + 1, n)]
    eps = np.finfo(float).eps

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2, axis=(1, 2)))
        if np.all(off <= eps * scale):
            break
        for p, r in pairs:
            apr = a[:, p, r]
            active = np.abs(apr) > eps * eps * scale
            if not active.any():
                continue
            app = a[:, p, p]
            arr = a[:, r, r]
            with np.errstate(divide="ignore", invalid="ignore"):
                theta = np.where(active, (arr - app) / (2.0 * apr), 0.0)
            sign = np.where(theta >= 0, 1.0, -1.0)
            t = np.where(active, sign / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # rotate columns p, r then rows p, r
            ap = a[:, :, p].copy()
            ar = a[:, :, r].copy()
            a[:, :, p] = c[:, None] * ap - s[:, None] * ar
            a[:, :, r] = s[:, None] * ap + c[:, None] * ar
            ap = a[:, p, :].copy()
            ar = a[:, r, :].copy()
            a[:, p, :] = c[:, None] * ap - s[:, None] * ar
            a[:, r, :] = s[:, None] * ap + c[:, None] * ar
            a[:, p, r] = 0.0
            a[:, r, p] = 0.0
            qp = q[:, :, p].copy()
            qr = q[:, :, r].copy()
            q[:, :, p] = c[:, None] * qp - s[:, None] * qr
            q[:, :, r] = s[:, None] * qp + c[:, None] * qr

    w = np.diagonal(a, axis1=1, axis2=2)
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    q = np.take_along_axis(q, order[:, None, :], axis=2)
    return SpectralDecomposition(w.reshape(batch + (n,)), q.reshape(batch + (n, n)))


def eigenvalues(a) -> np.ndarray:
    return eigen_decompose(a).eigenvalues


def matrix_cone_membership(a, k: int, tol: float = 1e-10) -> ConeLabel:
    """Garding-cone label of a single symmetric matrix via its eigenvalues."""
    a = symmetric_matrix(a)
    if a.ndim != 2:
        raise ValueError("matrix_cone_membership takes a single matrix")
    return gamma_k_membership(eigenvalues(a), k, tol)


def trace_and_extremes(a) -> tuple[float, float, float]:
    """``(trace, lambda_min, lambda_max)`` of a single symmetric matrix."""
    a = symmetric_matrix(a)
    w = eigenvalues(a)
    return float(np.trace(a)), float(w[0]), float(w[-1])

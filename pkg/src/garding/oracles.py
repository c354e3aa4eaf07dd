"""Independent reference computations used to check the solvers.

None of these share code paths with the quantities they check: subset
enumeration for S_k, a dense grid search for rho*_k, and convex hulls for
concave envelopes.
"""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np
from scipy.spatial import ConvexHull

from .sym_poly import gamma_k_slice_bounds


def subset_esp(lam, k: int) -> float:
    """S_k by summing the products of all k-subsets."""
    v = [float(x) for x in lam]
    if k == 0:
        return 1.0
    return float(sum(np.prod(c) for c in combinations(v, k)))


def _esp_columns(mu, k):
    e = [np.ones(mu.shape[0])] + [np.zeros(mu.shape[0]) for _ in range(k)]
    for i in range(mu.shape[1]):
        for j in range(k, 0, -1):
            e[j] = e[j] + mu[:, i] * e[j - 1]
    return e


def brute_force_rho_star(lam, k: int, step: float = 1e-3, chunk: int = 400) -> float:
    """Grid search for rho*_k over the slice ``S_1(mu) = n``, ``n <= 3``.

    On the slice the minimum of ``lam.mu / (n rho_k(mu))`` equals rho*_k when
    ``lam`` is in the closed dual cone; any grid point with ``lam.mu < 0``
    shows the infimum is ``-inf``.  ``lam`` is sorted ascending and ``mu``
    enumerated in descending order.
    """
    lam = np.sort(np.asarray(lam, dtype=float))
    n = lam.size
    if n > 3 or n < 2:
        raise ValueError("brute force is limited to n in {2, 3}")
    if k < 2:
        raise ValueError("the k = 1 slice is not compact")
    lo, hi = gamma_k_slice_bounds(n, k)
    c = comb(n, k)
    best = np.inf

    def evaluate(mu):
        nonlocal best
        e = _esp_columns(mu, k)
        ok = np.ones(mu.shape[0], dtype=bool)
        for j in range(1, k + 1):
            ok &= e[j] >= -1e-12
        if not ok.any():
            return
        dot = mu[ok] @ lam
        if np.any(dot < 0):
            best = -np.inf
            return
        rho = np.maximum(e[k][ok], 0.0) / c
        with np.errstate(divide="ignore"):
            vals = np.where(rho > 0, dot / (n * rho ** (1.0 / k)), np.inf)
        best = min(best, float(vals.min()))

    if n == 2:
        a = np.arange(1.0, hi + step / 2, step)
        evaluate(np.column_stack([a, 2.0 - a]))
        return best
    m1 = np.arange(1.0, hi + step / 2, step)
    for start in range(0, m1.size, chunk):
        rows = []
        for a in m1[start : start + chunk]:
            # mu2 in [max(lo, (3 - a) / 2 ... ), a] keeps mu1 >= mu2 >= mu3 >= lo
            b = np.arange(max((3.0 - a) / 2.0, lo), min(a, 3.0 - a - lo) + step / 2, step)
            if b.size == 0:
                continue
            rows.append(np.column_stack([np.full(b.size, a), b, 3.0 - a - b]))
        if rows:
            evaluate(np.concatenate(rows))
        if best == -np.inf:
            break
    return best


def hull_concave_envelope(coords, values) -> np.ndarray:
    """Least concave majorant of scattered samples via the upper convex hull.

    ``coords`` is a list of coordinate arrays (1 or 2 of them) of the same
    shape as ``values``.
    """
    values = np.asarray(values, dtype=float)
    if len(coords) == 1:
        return _upper_hull_1d(np.ravel(coords[0]), values.ravel()).reshape(values.shape)
    pts = np.column_stack([np.ravel(c) for c in coords] + [values.ravel()])
    hull = ConvexHull(pts)
    eq = hull.equations
    up = eq[eq[:, -2] > 1e-12]
    planes = -(pts[:, :-1] @ up[:, :-2].T + up[:, -1]) / up[:, -2]
    return planes.min(axis=1).reshape(values.shape)


def _upper_hull_1d(x, y):
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    hull = []
    for px, py in zip(xs, ys):
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0:
                hull.pop()
            else:
                break
        hull.append((px, py))
    hx, hy = np.array(hull).T
    out = np.interp(xs, hx, hy)
    res = np.empty_like(out)
    res[order] = out
    return res

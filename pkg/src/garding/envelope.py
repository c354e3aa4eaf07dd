"""Discrete k-convexity, upper k-envelopes and the gradient-norm check.

On a grid a function ``v`` is treated as k-convex when the eigenvalues of
its central-difference Hessian lie in the closed Garding cone at every
interior node.  The upper k-envelope of ``u`` is the least grid majorant
``w >= u`` for which ``-w`` is k-convex in that sense; it is computed by
damped red-black obstacle sweeps.  Only 1-D and 2-D grids are supported,
so the per-node eigenvalue problems are solved in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import GridDomain, GridFunction
from .sym_poly import closed_cone_mask

DAMPING = 0.9


def _inner(dim):
    return (slice(1, -1),) * dim


def discrete_hessian(values: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Hessian at every node not on the outer layer.

    Returns an array of shape ``grid + (dim, dim)``; the outer layer is zero.
    Mixed derivatives use the 4-point formula
    ``(v[+,+] - v[+,-] - v[-,+] + v[-,-]) / (4 h^2)``.
    """
    v = np.asarray(values, dtype=float)
    dim = v.ndim
    H = np.zeros(v.shape + (dim, dim))
    c = v[_inner(dim)]
    if dim == 1:
        H[1:-1, 0, 0] = (v[2:] - 2 * c + v[:-2]) / h**2
        return H
    H[1:-1, 1:-1, 0, 0] = (v[2:, 1:-1] - 2 * c + v[:-2, 1:-1]) / h**2
    H[1:-1, 1:-1, 1, 1] = (v[1:-1, 2:] - 2 * c + v[1:-1, :-2]) / h**2
    xy = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4 * h**2)
    H[1:-1, 1:-1, 0, 1] = xy
    H[1:-1, 1:-1, 1, 0] = xy
    return H


def _sym2_eigs(a, b, c):
    """Ascending eigenvalues of [[a, c], [c, b]] (vectorised)."""
    m = 0.5 * (a + b)
    r = np.hypot(0.5 * (a - b), c)
    return np.stack([m - r, m + r], axis=-1)


def hessian_eigenvalues(values: np.ndarray, h: float) -> np.ndarray:
    H = discrete_hessian(values, h)
    if H.shape[-1] == 1:
        return H[..., 0]
    return _sym2_eigs(H[..., 0, 0], H[..., 1, 1], H[..., 0, 1])


def k_convexity_test(u: GridFunction, k: int, tol: float = 1e-8) -> np.ndarray:
    """Boolean array: is the discrete Hessian of ``u`` in the closed k-cone?

    Only interior nodes are tested; other nodes are reported ``False``.
    """
    dim = u.domain.dim
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} outside 1..{dim}")
    eig = hessian_eigenvalues(u.values, u.domain.h)
    ok = closed_cone_mask(eig, k, tol)
    return ok & u.domain.interior_mask


@dataclass
class ContactSetResult:
    envelope: GridFunction
    contact_mask: np.ndarray
    tol_used: float
    iterations: int
    converged: bool
    max_update: float

    def to_dict(self) -> dict:
        d = self.envelope.to_dict()
        return {
            "envelope": d,
            "contact_mask": self.contact_mask.astype(int).ravel().tolist(),
            "tol_used": self.tol_used,
            "iterations": self.iterations,
            "converged": self.converged,
            "max_update": self.max_update,
        }


def _lowest_admissible(w: np.ndarray, h: float, k: int) -> np.ndarray:
    """Smallest centre value making ``-D2 w`` k-admissible, neighbours fixed.

    Writing the Hessian as ``H0 - (2 w_c / h^2) I`` the requirement is that
    ``s I - H0`` lies in the closed cone with ``s = 2 w_c / h^2``; the least
    such ``s`` is the largest root of ``S_k(s 1 - lambda(H0))``.
    """
    dim = w.ndim
    if dim == 1:
        s = (w[2:] + w[:-2]) / h**2
        return 0.5 * h * h * s
    a = (w[2:, 1:-1] + w[:-2, 1:-1]) / h**2
    b = (w[1:-1, 2:] + w[1:-1, :-2]) / h**2
    if k == 1:
        s = 0.5 * (a + b)
    else:
        c = (w[2:, 2:] - w[2:, :-2] - w[:-2, 2:] + w[:-2, :-2]) / (4 * h**2)
        s = 0.5 * (a + b) + np.hypot(0.5 * (a - b), c)
    return 0.5 * h * h * s


def upper_k_envelope(
    u: GridFunction,
    k: int,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    contact_tol: float = 1e-6,
    initial: np.ndarray | None = None,
    multilevel: bool = True,
) -> ContactSetResult:
    """Least grid majorant ``w >= u`` with ``-w`` discretely k-convex.

    Values off the interior mask are held at ``u``.  Interior values start
    at ``max(u)`` (or ``initial``) and are relaxed towards
    ``max(u, lowest admissible value)`` by damped red-black sweeps until the
    largest update falls below ``tol * osc(u)``.

    Parameters
    ----------
    u : GridFunction
        Function to envelope.
    k : int
        Cone index, ``1 <= k <= dim``.
    tol : float
        Relative stopping tolerance on the nodewise update.
    max_iter : int
        Maximum number of full (red + black) sweeps.
    contact_tol : float
        Nodes with ``w - u <= contact_tol * osc(u)`` form the contact set.
    initial : array, optional
        Starting values for the interior nodes.
    multilevel : bool
        Without ``initial``, start from the prolonged envelope of ``u``
        sampled on the grid with doubled spacing (when the shape allows).
        This only changes the starting point, not the fixed point.
    """
    dom = u.domain
    dim = dom.dim
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} outside 1..{dim}")
    uv = u.values
    interior = dom.interior_mask
    scale = max(u.osc(), np.finfo(float).tiny)
    if initial is None and multilevel and _coarsenable(dom):
        coarse_dom = GridDomain(tuple((s - 1) // 2 + 1 for s in dom.shape), 2 * dom.h,
                                interior[(slice(None, None, 2),) * dim], dom.origin, dom.diam)
        coarse = GridFunction(coarse_dom, uv[(slice(None, None, 2),) * dim])
        initial = _prolong(upper_k_envelope(coarse, k, tol=tol, max_iter=max_iter).envelope.values)
    if initial is None:
        w = np.where(interior, uv[dom.active_mask].max(), uv)
    else:
        w = np.where(interior, np.maximum(initial, uv), uv)

    idx = np.indices(dom.shape).sum(axis=0)
    inner = _inner(dim)
    colours = [((idx % 2 == p) & interior)[inner] for p in (0, 1)]
    u_in = uv[inner]

    it = 0
    max_upd = np.inf
    converged = False
    for it in range(1, max_iter + 1):
        max_upd = 0.0
        for col in colours:
            target = np.maximum(u_in, _lowest_admissible(w, dom.h, k))
            cur = w[inner]
            step = np.where(col, DAMPING * (target - cur), 0.0)
            w[inner] = cur + step
            max_upd = max(max_upd, float(np.abs(step).max()))
        if max_upd < tol * scale:
            converged = True
            break

    contact = interior & (w - uv <= contact_tol * scale)
    return ContactSetResult(GridFunction(dom, w), contact, contact_tol * scale, it, converged, max_upd)


def _coarsenable(dom: GridDomain) -> bool:
    return all(s % 2 == 1 and s >= 9 for s in dom.shape) and bool(
        dom.interior_mask[(slice(None, None, 2),) * dom.dim].any()
    )


def _prolong(c: np.ndarray) -> np.ndarray:
    """Linear interpolation from a grid to the one with half the spacing."""
    if c.ndim == 1:
        f = np.zeros(2 * c.size - 1)
        f[::2] = c
        f[1::2] = 0.5 * (c[1:] + c[:-1])
        return f
    rows = np.zeros((2 * c.shape[0] - 1, c.shape[1]))
    rows[::2] = c
    rows[1::2] = 0.5 * (c[1:] + c[:-1])
    f = np.zeros((rows.shape[0], 2 * c.shape[1] - 1))
    f[:, ::2] = rows
    f[:, 1::2] = 0.5 * (rows[:, 1:] + rows[:, :-1])
    return f


def contact_set(u: GridFunction, k: int, **kw) -> np.ndarray:
    return upper_k_envelope(u, k, **kw).contact_mask


def distance_to_boundary(domain: GridDomain) -> np.ndarray:
    """Euclidean distance from each node to the nearest non-interior node."""
    return ndimage.distance_transform_edt(domain.interior_mask) * domain.h


@dataclass
class GradientEstimate:
    lhs: float
    rhs_factor: float
    required_C: float
    exponent_ok: bool
    k_convex: bool
    nodes: int


def central_gradient(values: np.ndarray, h: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    g = np.zeros(v.shape + (v.ndim,))
    inner = _inner(v.ndim)
    if v.ndim == 1:
        g[1:-1, 0] = (v[2:] - v[:-2]) / (2 * h)
    else:
        g[1:-1, 1:-1, 0] = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * h)
        g[1:-1, 1:-1, 1] = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * h)
    return g


def gradient_estimate_check(v: GridFunction, k: int, r: float, kappa: float = 0.25) -> GradientEstimate:
    """Ratio ``||Dv||_{L^r(Omega')} / (diam^{(n-r)/r} sup|v|)``.

    ``Omega'`` holds the interior nodes at distance at least
    ``kappa * diam`` from the boundary.  The exponent condition
    ``r < n k / (n - k)`` (any finite ``r`` when ``k = n``) and the
    k-convexity of ``v`` are reported, not enforced.
    """
    dom = v.domain
    n = dom.dim
    if not 0 < kappa < 0.5:
        raise ValueError("kappa must lie in (0, 1/2)")
    if r < 1:
        raise ValueError("r must be at least 1")
    sub = dom.interior_mask & (distance_to_boundary(dom) >= kappa * dom.diam)
    if not sub.any():
        raise ValueError("the inner subdomain is empty at this resolution")
    g = central_gradient(v.values, dom.h)
    mag = np.sqrt((g[sub] ** 2).sum(axis=-1))
    lhs = float((np.sum(mag**r) * dom.cell_volume) ** (1.0 / r))
    sup = float(np.abs(v.values[dom.active_mask]).max())
    rhs = dom.diam ** ((n - r) / r) * sup
    req = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    ok = True if k >= n else r < n * k / (n - k)
    convex = bool(k_convexity_test(v, k)[dom.interior_mask].all())
    return GradientEstimate(lhs, rhs, req, ok, convex, int(sub.sum()))

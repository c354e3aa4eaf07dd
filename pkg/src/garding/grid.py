"""Uniform 1-D/2-D grids, grid functions and coefficient fields.

Arrays are indexed ``[i]`` in 1-D and ``[i, j]`` in 2-D with ``i`` along
``x`` and ``j`` along ``y``.  JSON payloads store values row-major (C order).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class GridDomain:
    """Uniform grid with an interior mask.

    Nodes outside ``interior_mask`` that touch an interior node (including
    diagonally) form the discrete boundary; any remaining nodes are padding
    that no operator reads.
    """

    shape: tuple
    spacing: float
    interior_mask: np.ndarray
    origin: tuple = None
    diam: float = None

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        if min(shape) < 3:
            raise ValueError("need at least 3 nodes per axis")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        mask = np.asarray(self.interior_mask, dtype=bool)
        if mask.shape != shape:
            raise ValueError(f"mask shape {mask.shape} != grid shape {shape}")
        edge = np.ones(shape, dtype=bool)
        edge[tuple(slice(1, -1) for _ in shape)] = False
        if np.any(mask & edge):
            raise ValueError("interior nodes need full stencils; clear the outer layer")
        mask = mask.copy()
        mask.setflags(write=False)
        origin = tuple(float(o) for o in (self.origin or (0.0,) * len(shape)))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "interior_mask", mask)
        object.__setattr__(self, "origin", origin)
        if self.diam is None:
            object.__setattr__(self, "diam", self._mask_diameter())

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def h(self) -> float:
        return self.spacing

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axes(self):
        return [o + self.spacing * np.arange(s) for o, s in zip(self.origin, self.shape)]

    def coords(self):
        """Coordinate arrays, one per axis, each of grid shape."""
        return np.meshgrid(*self.axes(), indexing="ij")

    @property
    def boundary_mask(self) -> np.ndarray:
        grown = ndimage.binary_dilation(self.interior_mask, structure=np.ones((3,) * self.dim))
        return grown & ~self.interior_mask

    @property
    def active_mask(self) -> np.ndarray:
        return self.interior_mask | self.boundary_mask

    def _mask_diameter(self) -> float:
        pts = np.stack([c[self.active_mask] for c in self.coords()], axis=-1)
        if len(pts) < 2:
            return 0.0
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        if self.dim == 1:
            return float(hi[0] - lo[0])
        # farthest pair lies on the convex hull; hull of a grid set is small
        from scipy.spatial import ConvexHull

        try:
            hull = pts[ConvexHull(pts).vertices]
        except Exception:
            hull = pts
        d = hull[:, None, :] - hull[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "spacing": self.spacing,
            "origin": list(self.origin),
            "diam": self.diam,
            "mask": self.interior_mask.astype(int).ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "GridDomain":
        shape = tuple(d["shape"])
        mask = np.asarray(d["mask"], dtype=bool).reshape(shape)
        return cls(shape, float(d["spacing"]), mask, tuple(d.get("origin") or ()), d.get("diam"))


def box_domain(lo, hi, h: float) -> GridDomain:
    """Rectangle (or interval) ``[lo, hi]`` with the outer node layer as boundary."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    shape = tuple(int(round((b - a) / h)) + 1 for a, b in zip(lo, hi))
    mask = np.zeros(shape, dtype=bool)
    mask[tuple(slice(1, -1) for _ in shape)] = True
    return GridDomain(shape, h, mask, tuple(lo), float(np.linalg.norm(hi - lo)))


def unit_square(h: float) -> GridDomain:
    return box_domain([0.0, 0.0], [1.0, 1.0], h)


def ball_domain(radius: float, h: float, dim: int = 2, centre=None) -> GridDomain:
    """Nodes strictly inside the ball of the given radius.

    The grid covers ``[-radius - h, radius + h]`` so every interior node has
    its full 9-point stencil.
    """
    centre = np.zeros(dim) if centre is None else np.asarray(centre, dtype=float)
    m = int(np.ceil(radius / h)) + 1
    lo = centre - m * h
    shape = (2 * m + 1,) * dim
    axes = [lo[i] + h * np.arange(shape[i]) for i in range(dim)]
    xs = np.meshgrid(*axes, indexing="ij")
    r2 = sum((x - c) ** 2 for x, c in zip(xs, centre))
    mask = r2 < radius**2 * (1 - 1e-12)
    return GridDomain(shape, h, mask, tuple(lo), 2.0 * radius)


@dataclass
class GridFunction:
    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.domain.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.domain.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        self.values = v

    @classmethod
    def from_callable(cls, domain: GridDomain, func) -> "GridFunction":
        return cls(domain, np.asarray(func(*domain.coords()), dtype=float) * np.ones(domain.shape))

    def interior_values(self):
        return self.values[self.domain.interior_mask]

    def osc(self) -> float:
        v = self.values[self.domain.active_mask]
        return float(v.max() - v.min())

    def to_dict(self) -> dict:
        d = self.domain.to_dict()
        d["values"] = self.values.ravel().tolist()
        return d

    @classmethod
    def from_dict(cls, d) -> "GridFunction":
        dom = GridDomain.from_dict(d)
        return cls(dom, np.asarray(d["values"], dtype=float).reshape(dom.shape))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        return cls.from_dict(json.loads(text))


def _upper_triangle(a):
    n = a.shape[-1]
    iu = np.triu_indices(n)
    return a[..., iu[0], iu[1]]


def _from_upper_triangle(v, n):
    iu = np.triu_indices(n)
    a = np.zeros(v.shape[:-1] + (n, n))
    a[..., iu[0], iu[1]] = v
    a[..., iu[1], iu[0]] = v
    return a


@dataclass
class SymmetricMatrixField:
    """Coefficients ``A(x)``, ``b(x)``, ``c(x)`` of ``Lu = A:D2u + b.Du + c u``.

    ``A`` has shape ``grid + (n, n)``.  For :func:`apply_operator` the matrix
    size must match the grid dimension; nodewise ellipticity quantities
    accept any ``n <= 8``.
    """

    domain: GridDomain
    A: np.ndarray
    b: np.ndarray = None
    c: np.ndarray = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        shape = self.domain.shape
        if A.shape[: len(shape)] != shape or A.ndim != len(shape) + 2 or A.shape[-1] != A.shape[-2]:
            raise ValueError(f"A must have shape grid + (n, n), got {A.shape}")
        A = 0.5 * (A + np.swapaxes(A, -1, -2))
        n = A.shape[-1]
        b = np.zeros(shape + (n,)) if self.b is None else np.asarray(self.b, dtype=float)
        c = np.zeros(shape) if self.c is None else np.asarray(self.c, dtype=float)
        if b.shape != shape + (n,):
            raise ValueError(f"b must have shape {shape + (n,)}")
        if c.shape != shape:
            raise ValueError(f"c must have shape {shape}")
        self.A, self.b, self.c = A, b, c

    @property
    def n(self) -> int:
        return self.A.shape[-1]

    def to_dict(self) -> dict:
        n = self.n
        return {
            "domain": self.domain.to_dict(),
            "n": n,
            "A": _upper_triangle(self.A).reshape(-1).tolist(),
            "b": self.b.reshape(-1).tolist(),
            "c": self.c.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "SymmetricMatrixField":
        dom = GridDomain.from_dict(d["domain"])
        n = int(d["n"])
        m = n * (n + 1) // 2
        A = _from_upper_triangle(np.asarray(d["A"], dtype=float).reshape(dom.shape + (m,)), n)
        b = np.asarray(d["b"], dtype=float).reshape(dom.shape + (n,))
        c = np.asarray(d["c"], dtype=float).reshape(dom.shape)
        return cls(dom, A, b, c)

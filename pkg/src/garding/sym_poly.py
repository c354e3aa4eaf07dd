"""Elementary symmetric polynomials and Garding cone membership.

Vectors of eigenvalues are handled as plain float arrays; the
:class:`SpectrumVector` wrapper only enforces the sorted-order invariant
for callers that want it.  Every function here accepts unsorted input and
sorts internally where the order matters.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb

import numpy as np

MAX_DIM = 8


class Membership(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class ConeLabel:
    k: int
    membership: Membership
    tol: float

    @property
    def interior(self) -> bool:
        return self.membership is Membership.INTERIOR

    @property
    def in_closure(self) -> bool:
        return self.membership is not Membership.OUTSIDE


@dataclass(frozen=True)
class SpectrumVector:
    """Eigenvalues in non-decreasing order, ``2 <= n <= 8``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size < 2:
            raise ValueError("a spectrum needs at least two entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return self.values.size


def _as_vector(lam) -> np.ndarray:
    v = np.asarray(lam, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def esp_all(x, kmax=None) -> np.ndarray:
    """All elementary symmetric polynomials ``S_0, ..., S_kmax`` of ``x``.

    ``x`` may be batched: the last axis holds the vector.  The coefficients
    of ``prod_i (1 + x_i t)`` are accumulated one root at a time, which costs
    ``O(n * kmax)`` and never enumerates subsets.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if kmax is None:
        kmax = n
    e = np.zeros(x.shape[:-1] + (kmax + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        xi = x[..., i : i + 1]
        e[..., 1:] = e[..., 1:] + xi * e[..., :-1]
    return e


def elementary_symmetric(lam, k: int) -> float:
    """Return ``S_k(lam)``; ``S_0 = 1``.

    >>> elementary_symmetric([1.0, 2.0, 3.0], 2)
    11.0
    """
    v = _as_vector(lam)
    n = v.size
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    if k == 0:
        return 1.0
    return float(esp_all(v, k)[k])


def rho_k(lam, k: int, tol: float = 1e-10) -> float:
    """Normalised k-th root ``(S_k / C(n, k)) ** (1/k)`` on the closed cone."""
    v = _as_vector(lam)
    n = v.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    label = gamma_k_membership(v, k, tol)
    if label.membership is Membership.OUTSIDE:
        raise ValueError(f"{v} lies outside the closed Garding cone of index {k}")
    s = esp_all(v, k)[k] / comb(n, k)
    return float(max(s, 0.0) ** (1.0 / k))


def _scales(v: np.ndarray, k: int) -> np.ndarray:
    base = max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
    return base ** np.arange(1, k + 1)


def gamma_k_membership(lam, k: int, tol: float = 1e-10) -> ConeLabel:
    """Classify ``lam`` against the Garding cone of index ``k``.

    The test on ``S_j`` is scaled by ``max(1, |lam|_inf) ** j`` since ``S_j``
    is homogeneous of degree ``j``.
    """
    v = _as_vector(lam)
    n = v.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = esp_all(v, k)[1:]
    thresh = tol * _scales(v, k)
    if np.all(s > thresh):
        m = Membership.INTERIOR
    elif np.all(s >= -thresh):
        m = Membership.BOUNDARY
    else:
        m = Membership.OUTSIDE
    return ConeLabel(k, m, tol)


def closed_cone_mask(lams, k: int, tol: float = 1e-10) -> np.ndarray:
    """Vectorised closed-cone test over the last axis of ``lams``."""
    lams = np.asarray(lams, dtype=float)
    s = esp_all(lams, k)[..., 1:]
    base = np.maximum(1.0, np.max(np.abs(lams), axis=-1, keepdims=True))
    thresh = tol * base ** np.arange(1, k + 1)
    return np.all(s >= -thresh, axis=-1)


def in_closed_cone(lam, k: int, tol: float = 1e-10) -> bool:
    return gamma_k_membership(lam, k, tol).in_closure


def fundamental_inequality_check(mu, k: int) -> float:
    """Evaluate ``(n - k) S_1(mu) + n (k - 1) min(mu)``.

    The minimum component plays the role of the last entry when ``mu`` is
    ordered decreasingly.  The value is positive on the open cone.
    """
    v = _as_vector(mu)
    n = v.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    return float((n - k) * v.sum() + n * (k - 1) * v.min())


def gamma_k_slice_bounds(n: int, k: int) -> tuple[float, float]:
    """Componentwise box containing ``{mu in closed cone, S_1(mu) = n}``.

    For ``k >= 2`` the smallest entry is at least ``-(n-k)/(k-1)``, and the
    largest is then bounded because the entries sum to ``n``.
    """
    if k < 2 or k > n:
        raise ValueError(f"slice of the index-{k} cone in R^{n} is not compact")
    lower = -(n - k) / (k - 1)
    upper = n - (n - 1) * lower
    return float(lower), float(upper)


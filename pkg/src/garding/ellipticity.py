"""Pucci-type ellipticity margins and uniform-ellipticity ratios.

``a0`` is the largest ratio trace / lambda_min over a coefficient field and
``a_k`` the largest lambda_max / rho*_k.  A positive margin
``chi = k - n (1 - (n - 1) / a0)`` places every coefficient matrix inside
the open dual cone, and yields the explicit lower bound returned by
:func:`rho_star_lower_bound`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .dual_cone import MEMBERSHIP_TOL, rho_star_values
from .grid import SymmetricMatrixField
from .spectral import eigenvalues


def chi(n: int, k: int, a0: float) -> float:
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    return k - n * (1.0 - (n - 1) / a0)


def chi_threshold(n: int, k: int) -> float:
    """Largest ``a0`` with ``chi > 0`` (``inf`` when ``k = n``)."""
    if k >= n:
        return np.inf
    return n * (n - 1) / (n - k)


def side_condition(n: int, k: int, a0: float) -> bool:
    """``chi * a0 <= (k - 1) / (n - 1)``."""
    return chi(n, k, a0) * a0 <= (k - 1) / (n - 1)


def rho_star_lower_bound(lam, k: int, a0: float | None = None) -> tuple[float, bool]:
    """Lower bound ``chi a0 lambda_min / (n (k - 1))`` for rho*_k.

    ``a0`` defaults to the ratio trace / lambda_min of ``lam`` itself.  The
    flag is true when ``chi > 0`` and the side condition
    ``chi a0 <= (k-1)/(n-1)`` holds; only then may the bound replace rho*_k.
    """
    lam = np.sort(np.asarray(lam, dtype=float).ravel())
    n = lam.size
    if k < 2:
        raise ValueError("the lower bound degenerates for k = 1 (rho*_1 = lambda_min)")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if lam[0] <= 0:
        raise ValueError("eigenvalues must be positive")
    if a0 is None:
        a0 = lam.sum() / lam[0]
    x = chi(n, k, a0)
    bound = x * a0 * lam[0] / (n * (k - 1))
    valid = x > 0 and x * a0 <= (k - 1) / (n - 1)
    return float(bound), bool(valid)


@dataclass
class EllipticityProfile:
    n: int
    k: int
    a0: float
    a_k: float
    chi: float
    chi_side_condition: bool
    ratio_bound: float  # (n/k)^k C(n,k)^-1 a_k^k as printed
    ratio_bound_corrected: float  # (k/n)^k C(n,k) a_k^k, implied by the rho*_k upper bound
    crude_bound: float  # a_k^k
    max_condition: float  # sup lambda_max / lambda_min
    printed_holds: bool
    corrected_holds: bool
    crude_holds: bool
    outside_nodes: int
    nodes: int
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        for key, v in d.items():
            if isinstance(v, float) and not np.isfinite(v):
                d[key] = None
        return d


def ellipticity_profile(fld: SymmetricMatrixField, k: int, mask=None,
                        tol: float = MEMBERSHIP_TOL) -> EllipticityProfile:
    """Nodewise maxima of ``trace/lambda_min`` and ``lambda_max/rho*_k``.

    Suprema over the domain are maxima over the interior nodes (or
    ``mask``).  Nodes outside the open dual cone are counted; ``a_k`` is
    then ``inf``.
    """
    n = fld.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    mask = fld.domain.interior_mask if mask is None else np.asarray(mask, bool)
    A = fld.A[mask]
    lam = eigenvalues(A)
    if np.any(lam[:, 0] <= 0):
        raise ValueError("coefficient matrices must be positive definite on the mask")
    a0 = float(np.max(lam.sum(axis=1) / lam[:, 0]))
    rs = rho_star_values(lam, k)
    inside = rs > tol * np.linalg.norm(lam, axis=1)
    outside = int((~inside).sum())
    a_k = float(np.max(lam[:, -1] / rs)) if outside == 0 else np.inf
    cond = float(np.max(lam[:, -1] / lam[:, 0]))
    x = chi(n, k, a0)
    side = bool(x > 0 and x * a0 <= (k - 1) / (n - 1)) if n > 1 else False
    printed = (n / k) ** k / comb(n, k) * a_k**k
    corrected = (k / n) ** k * comb(n, k) * a_k**k
    crude = a_k**k
    slack = 1e-6 * max(1.0, cond)
    notes = []
    if outside == 0 and cond > printed + slack:
        notes.append("printed refined ratio bound violated")
    return EllipticityProfile(
        n, k, a0, a_k, x, side, printed, corrected, crude, cond,
        printed_holds=bool(outside == 0 and cond <= printed + slack),
        corrected_holds=bool(outside == 0 and cond <= corrected + slack),
        crude_holds=bool(outside == 0 and cond <= crude + slack),
        outside_nodes=outside, nodes=int(mask.sum()), notes=notes,
    )

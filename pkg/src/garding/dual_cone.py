"""The dual function rho*_k and dual-cone membership.

``rho_star`` evaluates

    rho*_k(lam) = inf { lam . mu / n : mu in Gamma_k, S_k(mu) >= C(n, k) }

with a log-barrier interior-point method.  The feasible region is convex
because ``log S_j`` is concave on ``Gamma_k`` for every ``j <= k``, so damped
Newton steps on the barrier objective converge from any strictly feasible
start.  Before the main solve the linear objective is minimised over the
compact slice ``{mu in closed Gamma_k, S_1(mu) = n}``; a negative minimum is a
certificate that the infimum is ``-inf``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import comb, log

import numpy as np

from .sym_poly import (
    ConeLabel,
    Membership,
    esp_all,
    gamma_k_membership,
    in_closed_cone,
)

DEFAULT_TOL = 1e-8
MEMBERSHIP_TOL = 1e-6


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    BOUNDARY_OPTIMAL = "boundary_optimal"
    UNBOUNDED_BELOW = "unbounded_below"
    INFEASIBLE_INPUT = "infeasible_input"


@dataclass
class DualEvalResult:
    value: float
    status: Status
    optimal_mu: np.ndarray | None = None
    certificate: np.ndarray | None = None
    iterations: int = 0
    kkt_residual: float = float("nan")
    duality_gap_estimate: float = float("nan")
    tol: float = DEFAULT_TOL
    info: dict = field(default_factory=dict)

    @property
    def bounded(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.BOUNDARY_OPTIMAL)

    def as_float(self) -> float:
        """Value with ``-inf`` standing in for an unbounded problem."""
        if self.status is Status.UNBOUNDED_BELOW:
            return -np.inf
        return self.value

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [float(x) for x in a]

        return {
            "value": None if not np.isfinite(self.value) else float(self.value),
            "status": self.status.value,
            "optimal_mu": arr(self.optimal_mu),
            "certificate": arr(self.certificate),
            "iterations": int(self.iterations),
            "kkt_residual": _finite_or_none(self.kkt_residual),
            "duality_gap_estimate": _finite_or_none(self.duality_gap_estimate),
            "tol": float(self.tol),
        }


def _finite_or_none(x):
    return float(x) if np.isfinite(x) else None


# -- derivatives of S_0..S_k ---------------------------------------------------


def esp_derivatives(mu: np.ndarray, k: int):
    """Values, gradients and Hessians of ``S_0..S_k`` at ``mu``.

    Uses ``dS_j/dmu_i = S_{j-1}(mu without i)`` and
    ``d2S_j/dmu_i dmu_l = S_{j-2}(mu without i, l)``; removing an entry is the
    same as zeroing it.
    """
    n = mu.size
    m = np.broadcast_to(mu, (1 + n + n * n, n)).copy()
    idx = np.arange(n)
    m[1 + idx, idx] = 0.0
    pair = m[1 + n :].reshape(n, n, n)
    pair[idx, :, idx] = 0.0
    pair[:, idx, idx] = 0.0
    e = esp_all(m, k)
    s = e[0]
    e1 = e[1 : 1 + n]  # (n, k+1)
    e2 = e[1 + n :].reshape(n, n, k + 1)
    grad = np.zeros((k + 1, n))
    grad[1:] = e1[:, :-1].T
    hess = np.zeros((k + 1, n, n))
    if k >= 2:
        hess[2:] = np.moveaxis(e2[:, :, :-2], 2, 0)
        hess[:, idx, idx] = 0.0
    return s, grad, hess


def _esp_py(x, k):
    e = [1.0] + [0.0] * k
    for i, xi in enumerate(x):
        for j in range(min(i + 1, k), 0, -1):
            e[j] += xi * e[j - 1]
    return e


# -- generic damped Newton barrier loop -------------------------------------


class _Barrier:
    """Private workspace for one barrier solve."""

    def __init__(self, c, k, lower_j, rhs_k, basis=None, origin=None):
        self.c = c  # linear objective on mu
        self.k = k
        self.lower_j = lower_j  # barrier on S_j for j = lower_j..k
        self.rhs_k = rhs_k  # S_k - rhs_k > 0
        self.basis = basis
        self.origin = origin
        self.iterations = 0

    def mu(self, z):
        if self.basis is None:
            return z
        return self.origin + self.basis @ z

    def phi(self, t, mu):
        s = _esp_py(mu.tolist(), self.k)
        total = 0.0
        for j in range(1, self.k + 1):
            v = s[j] - self.rhs_k if j == self.k else s[j]
            if v <= 0.0:
                return np.inf
            if j >= self.lower_j:
                total -= log(v)
        return t * float(self.c @ mu) + total

    def grad_hess(self, t, mu):
        s, g, h = esp_derivatives(mu, self.k)
        js = np.arange(self.lower_j, self.k + 1)
        slack = s[js].copy()
        slack[-1] -= self.rhs_k
        gj = g[js]
        hj = h[js]
        grad = t * self.c - np.sum(gj / slack[:, None], axis=0)
        hess = np.einsum("ji,jl->il", gj / slack[:, None], gj / slack[:, None]) - np.sum(
            hj / slack[:, None, None], axis=0
        )
        if self.basis is not None:
            grad = self.basis.T @ grad
            hess = self.basis.T @ hess @ self.basis
        return grad, hess

    def centre(self, t, z, max_newton=80, eps=1e-12):
        for _ in range(max_newton):
            mu = self.mu(z)
            grad, hess = self.grad_hess(t, mu)
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            dec2 = -grad @ step
            self.iterations += 1
            if not np.isfinite(dec2) or dec2 / 2 <= eps:
                break
            f0 = self.phi(t, mu)
            a = 1.0
            while a > 1e-14:
                z_new = z + a * step
                f1 = self.phi(t, self.mu(z_new))
                if f1 <= f0 - 0.25 * a * dec2:
                    break
                a *= 0.3
            else:
                break
            z = z_new
        return z

    def solve(self, z0, gap_tol, t0=1.0, factor=50.0, max_outer=60, stop=None):
        m = self.k - self.lower_j + 1
        t = t0
        z = z0
        for _ in range(max_outer):
            z = self.centre(t, z)
            if stop is not None and stop(self.mu(z), m / t):
                break
            if m / t < gap_tol:
                break
            t *= factor
        return self.mu(z), m / t


# -- slice minimisation ------------------------------------------------------


def _orth_complement_of_ones(n):
    """Orthonormal basis (n, n-1) of the hyperplane sum(x) = 0."""
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
    return q[:, 1:]


def slice_minimum(lam, k: int, tol: float = 1e-10, early_negative: bool = True):
    """Minimise ``lam . mu`` over ``{mu in closed Gamma_k, S_1(mu) = n}``.

    Returns ``(value, mu, gap)`` where ``value = lam . mu`` at the returned
    interior point and ``value - gap`` is a lower bound for the minimum.
    With ``early_negative`` the solve stops as soon as a point with negative
    objective is found, which is already a certificate of unboundedness, or
    as soon as ``value - gap > 0`` proves the minimum positive.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.size
    if k < 2:
        raise ValueError("the index-1 slice is not compact")
    basis = _orth_complement_of_ones(n)
    bar = _Barrier(lam, k, lower_j=2, rhs_k=0.0, basis=basis, origin=np.ones(n))
    stop = None
    if early_negative:
        def stop(mu, gap):
            v = lam @ mu
            return v < 0 or v - gap > 0
    mu, gap = bar.solve(np.zeros(n - 1), gap_tol=tol, stop=stop)
    return float(lam @ mu), mu, gap


# -- rho*_k --------------------------------------------------------------------


def _k1_certificate(lam):
    n = lam.size
    i, j = int(np.argmin(lam)), int(np.argmax(lam))
    mu = np.ones(n)
    if lam[j] - lam[i] <= 0:
        return mu  # constant non-positive vector, (1..1) already works
    t = (abs(lam.sum()) + 1.0) / (lam[j] - lam[i])
    mu[i] += t
    mu[j] -= t
    return mu


def rho_star(lam, k: int, tol: float = DEFAULT_TOL) -> DualEvalResult:
    """Evaluate the dual function ``rho*_k`` at ``lam``.

    Parameters
    ----------
    lam : array_like
        Eigenvalue vector, any order.
    k : int
        Cone index, ``1 <= k <= n``.
    tol : float
        Target duality gap relative to ``|lam|_2``.

    Returns
    -------
    DualEvalResult
        ``optimal_mu`` (and ``certificate`` when unbounded) are expressed in
        the caller's ordering of ``lam``.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    n = lam.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    if not np.all(np.isfinite(lam)):
        return DualEvalResult(np.nan, Status.INFEASIBLE_INPUT, tol=tol)
    scale = float(np.linalg.norm(lam))
    if scale == 0.0:
        return DualEvalResult(0.0, Status.BOUNDARY_OPTIMAL, None, tol=tol,
                              duality_gap_estimate=0.0, kkt_residual=0.0)

    if k == 1:
        return _rho_star_k1(lam, tol)

    order = np.argsort(lam, kind="stable")
    lam_s = lam[order] / scale
    inverse = np.empty(n, dtype=int)
    inverse[order] = np.arange(n)
    iterations = 0

    if lam_s[0] < 0.0:
        # n e_min lies in the closed cone on the slice and has negative pairing
        cert = np.zeros(n)
        cert[0] = n
        return DualEvalResult(-np.inf, Status.UNBOUNDED_BELOW, None,
                              certificate=cert[inverse], tol=tol,
                              info={"slice_minimum": n * lam_s[0] * scale})
    val, mu_hat, gap = slice_minimum(lam_s, k, tol=min(tol, 1e-10))
    if val < 0:
        cert = np.sort(mu_hat)[::-1]
        return DualEvalResult(-np.inf, Status.UNBOUNDED_BELOW, None,
                              certificate=cert[inverse], tol=tol,
                              info={"slice_minimum": val * scale})
    if val - gap <= 0.0:
        # lam sits on the boundary of the closed dual cone; the infimum is
        # approached only as |mu| -> inf and equals zero
        return DualEvalResult(0.0, Status.BOUNDARY_OPTIMAL, None, tol=tol,
                              duality_gap_estimate=gap * scale / n,
                              info={"slice_minimum": val * scale})

    target = comb(n, k)
    bar = _Barrier(lam_s / n, k, lower_j=1, rhs_k=target)
    mu0 = np.full(n, 1.5)
    mu, gap = bar.solve(mu0, gap_tol=tol, t0=1.0)
    iterations += bar.iterations

    mu = np.sort(mu)[::-1]
    # the barrier keeps S_k > C(n,k); pull back onto the constraint along the ray
    sk = esp_all(mu, k)[k]
    if sk > target:
        mu = mu * (target / sk) ** (1.0 / k)
    value = float(lam_s @ mu) / n
    status = Status.OPTIMAL
    if mu[-1] <= 1e-6 * mu[0]:
        status = Status.BOUNDARY_OPTIMAL
    _, g, _ = esp_derivatives(mu, k)
    gk = g[k]
    nu = (lam_s @ gk) / (n * (gk @ gk))
    kkt = float(np.linalg.norm(lam_s / n - nu * gk) / np.linalg.norm(lam_s / n))
    return DualEvalResult(
        value * scale,
        status,
        mu[inverse],
        iterations=iterations,
        kkt_residual=kkt,
        duality_gap_estimate=gap * scale,
        tol=tol,
    )


def _rho_star_k1(lam, tol):
    spread = lam.max() - lam.min()
    if spread <= tol * np.max(np.abs(lam)) and lam.min() >= 0:
        n = lam.size
        return DualEvalResult(float(lam.min()), Status.OPTIMAL, np.ones(n),
                              kkt_residual=0.0, duality_gap_estimate=0.0, tol=tol)
    return DualEvalResult(-np.inf, Status.UNBOUNDED_BELOW, None,
                          certificate=_k1_certificate(lam), tol=tol)


def upper_bound_1_7(lam, k: int) -> float:
    """``(k/n) C(n,k)^(1/k) (lam_1 ... lam_k)^(1/k)`` over the k smallest entries."""
    lam = np.sort(np.asarray(lam, dtype=float).ravel())
    n = lam.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    head = lam[:k]
    if np.any(head <= 0):
        raise ValueError("the k smallest eigenvalues must be positive")
    return float(k / n * comb(n, k) ** (1.0 / k) * np.exp(np.mean(np.log(head))))


def comparison_mu(lam, k: int) -> np.ndarray:
    """Feasible ``mu`` attaining :func:`upper_bound_1_7` (ascending ``lam`` order).

    ``mu_i = C(n,k)^(1/k) (lam_1...lam_k)^(1/k) / lam_i`` for the k smallest
    entries, zero elsewhere.  The result is returned in the caller's
    ordering of ``lam``.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    n = lam.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    order = np.argsort(lam, kind="stable")
    head = lam[order[:k]]
    if np.any(head <= 0):
        raise ValueError("the k smallest eigenvalues must be positive")
    g = comb(n, k) ** (1.0 / k) * np.exp(np.mean(np.log(head)))
    mu = np.zeros(n)
    mu[order[:k]] = g / head
    return mu


def dual_membership(lam, k: int, tol: float = MEMBERSHIP_TOL) -> ConeLabel:
    """Classify ``lam`` against the open dual cone and its closure."""
    lam = np.asarray(lam, dtype=float).ravel()
    n = lam.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    scale = float(np.linalg.norm(lam))
    if scale == 0.0:
        return ConeLabel(k, Membership.BOUNDARY, tol)
    if k == 1:
        if lam.max() - lam.min() > tol * scale or lam.min() < -tol * scale:
            return ConeLabel(k, Membership.OUTSIDE, tol)
        if lam.min() <= tol * scale:
            return ConeLabel(k, Membership.BOUNDARY, tol)
        return ConeLabel(k, Membership.INTERIOR, tol)
    lam_s = np.sort(lam) / scale
    if lam_s[0] <= tol:
        val, _, gap = slice_minimum(lam_s, k, tol=1e-12, early_negative=False)
        if val < -tol:
            return ConeLabel(k, Membership.OUTSIDE, tol)
        if val - gap <= tol:
            return ConeLabel(k, Membership.BOUNDARY, tol)
    res = rho_star(lam_s, k)
    if res.status is Status.UNBOUNDED_BELOW:
        return ConeLabel(k, Membership.OUTSIDE, tol)
    if res.value <= tol:
        return ConeLabel(k, Membership.BOUNDARY, tol)
    return ConeLabel(k, Membership.INTERIOR, tol)


def certificate_is_valid(lam, k: int, cert, tol: float = 1e-10) -> bool:
    """Check an unboundedness certificate.

    Valid means ``cert`` lies in the closed cone, ``S_1(cert) = n`` and
    ``lam.cert < 0``.

    Such a direction can be added to any feasible point indefinitely, so the
    dual objective is unbounded below.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    cert = np.asarray(cert, dtype=float).ravel()
    if cert.shape != lam.shape or not np.all(np.isfinite(cert)):
        return False
    n = lam.size
    on_slice = abs(cert.sum() - n) <= 1e-9 * n
    return bool(on_slice and in_closed_cone(cert, k, tol) and lam @ cert < 0)


def is_dual_interior(lam, k: int, tol: float = MEMBERSHIP_TOL) -> bool:
    return dual_membership(lam, k, tol).interior




def rho_star_values(eigs, k: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``rho*_k`` for a stack of eigenvalue vectors (last axis), ``-inf`` if unbounded.

    ``k = n`` uses ``rho*_n = det^(1/n)`` on the positive cone and ``k = 1``
    the dual-ray characterisation; other indices call :func:`rho_star` once
    per distinct vector.
    """
    eigs = np.sort(np.asarray(eigs, dtype=float), axis=-1)
    n = eigs.shape[-1]
    flat = eigs.reshape(-1, n)
    out = np.empty(flat.shape[0])
    if k == n:
        pos = flat[:, 0] >= 0
        out[:] = -np.inf
        out[pos] = np.exp(np.mean(np.log(np.maximum(flat[pos], 1e-300)), axis=1))
        out[pos & (flat[:, 0] == 0)] = 0.0
        return out.reshape(eigs.shape[:-1])
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    vals = np.array([rho_star(row, k, tol).as_float() for row in uniq])
    return vals[np.ravel(inv)].reshape(eigs.shape[:-1])

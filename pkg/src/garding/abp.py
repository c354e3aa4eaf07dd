"""Manufactured-solution harness for maximum-principle estimates.

Every estimate in scope has the shape

    sup u - sup_boundary u <= C * geometry * drift * source

with a non-constructive constant ``C``.  Given a coefficient field and a
chosen ``u`` the harness evaluates the left side and all right-side factors
and reports the constant that would be required.  The drift and Gronwall
algebra used to pass from the drift-free estimate to the full one is
available as :func:`gronwall_factor` and :func:`gronwall_recurrence_check`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dual_cone import is_dual_interior, rho_star_values
from .ellipticity import chi, chi_threshold, rho_star_lower_bound
from .envelope import central_gradient, discrete_hessian, upper_k_envelope
from .grid import GridDomain, GridFunction, SymmetricMatrixField, ball_domain
from .spectral import eigenvalues

THEOREMS = ("T1.1/Eq1.8", "T1.2/Eq1.9", "Eq2.10", "Eq2.12")
CSV_SCHEMA_VERSION = "garding-report-v1"
CSV_COLUMNS = (
    "theorem_id", "n", "k", "p", "q", "h", "lhs", "geometry_factor",
    "drift_factor", "source_norm", "required_C", "hypotheses_ok", "flags",
)


# -- operator and norms --------------------------------------------------------


def apply_operator(fld: SymmetricMatrixField, u: GridFunction) -> GridFunction:
    """``A:D2u + b.Du + c u`` by central differences at interior nodes.

    Non-interior nodes are set to zero.
    """
    dom = u.domain
    if fld.n != dom.dim:
        raise ValueError(f"matrix size {fld.n} does not match grid dimension {dom.dim}")
    H = discrete_hessian(u.values, dom.h)
    g = central_gradient(u.values, dom.h)
    Lu = np.einsum("...ij,...ij->...", fld.A, H) + np.einsum("...i,...i->...", fld.b, g)
    Lu = Lu + fld.c * u.values
    return GridFunction(dom, np.where(dom.interior_mask, Lu, 0.0))


def weighted_lq_norm(f: GridFunction, weight, q: float, mask=None) -> float:
    """Midpoint-rule ``(sum_mask |f / weight|^q h^n)^(1/q)``."""
    if q < 1:
        raise ValueError("q must be at least 1")
    dom = f.domain
    mask = dom.interior_mask if mask is None else np.asarray(mask, dtype=bool)
    w = weight.values if isinstance(weight, GridFunction) else np.broadcast_to(weight, dom.shape)
    fm, wm = f.values[mask], w[mask]
    if np.any(wm == 0):
        raise ValueError("zero weight on the integration mask")
    if fm.size == 0:
        return 0.0
    return float((np.sum(np.abs(fm / wm) ** q) * dom.cell_volume) ** (1.0 / q))


def negative_part(f: GridFunction) -> GridFunction:
    return GridFunction(f.domain, np.maximum(-f.values, 0.0))


# -- manufactured problems -----------------------------------------------------


@dataclass
class ManufacturedProblem:
    field: SymmetricMatrixField
    u: GridFunction
    f: GridFunction
    boundary_sup: float

    @classmethod
    def from_solution(cls, fld: SymmetricMatrixField, u: GridFunction) -> "ManufacturedProblem":
        dom = u.domain
        return cls(fld, u, apply_operator(fld, u), float(u.values[dom.boundary_mask].max()))

    def to_dict(self) -> dict:
        d = self.field.to_dict()
        d["u"] = self.u.values.ravel().tolist()
        return d

    @classmethod
    def from_dict(cls, d) -> "ManufacturedProblem":
        fld = SymmetricMatrixField.from_dict(d)
        u = GridFunction(fld.domain, np.asarray(d["u"], dtype=float).reshape(fld.domain.shape))
        return cls.from_solution(fld, u)


# -- hypotheses ----------------------------------------------------------------


def hypothesis_flags(theorem_id: str, n: int, k: int, p: float, q: float) -> dict:
    """Parameter conditions attached to each estimate (``True`` = satisfied)."""
    if theorem_id not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem_id!r}")
    flags = {}
    if theorem_id == "Eq2.12":
        flags["q_gt_n_over_2"] = q > n / 2
        return flags
    flags["k_ge_n_over_2"] = 2 * k >= n
    flags["p_range"] = p >= n if k == n else p > n
    if 2 * k > n:
        flags["q_ge_k"] = q >= k
    else:
        flags["q_gt_n_over_2"] = q > n / 2
    if theorem_id == "T1.2/Eq1.9":
        flags["k_gt_n_over_2"] = 2 * k > n
    return flags


# -- estimate reports ------------------------------------------------------------


@dataclass
class EstimateReport:
    theorem_id: str
    n: int
    k: int
    p: float
    q: float
    h: float
    lhs: float
    geometry_factor: float
    drift_factor: float
    source_norm: float
    required_C: float
    hypothesis_flags: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def hypotheses_ok(self) -> bool:
        return all(self.hypothesis_flags.values())

    def to_dict(self) -> dict:
        d = {c: getattr(self, c) for c in CSV_COLUMNS if c not in ("hypotheses_ok", "flags")}
        d["hypotheses_ok"] = self.hypotheses_ok
        d["hypothesis_flags"] = dict(self.hypothesis_flags)
        d["info"] = {k: _jsonable(v) for k, v in self.info.items()}
        return {k: _jsonable(v) for k, v in d.items()}

    def csv_row(self) -> list:
        flags = ";".join(f"{k}={int(v)}" for k, v in sorted(self.hypothesis_flags.items()))
        return [self.theorem_id, self.n, self.k, self.p, self.q, self.h, repr(self.lhs),
                repr(self.geometry_factor), repr(self.drift_factor), repr(self.source_norm),
                repr(self.required_C), int(self.hypotheses_ok), flags]


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"# {CSV_SCHEMA_VERSION}"])
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def dual_weights(fld: SymmetricMatrixField, k: int, mask=None, substitution: str = "dual"):
    """Nodewise rho*_k(A) on ``mask`` plus lambda_min and trace.

    With ``substitution="chi"`` the lower bound ``chi a0 lambda_min / (n (k-1))``
    replaces rho*_k; ``a0`` is the maximum of trace/lambda_min over the mask.
    """
    mask = fld.domain.interior_mask if mask is None else mask
    lam = eigenvalues(fld.A[mask])
    if substitution == "dual":
        rho = rho_star_values(lam, k)
    elif substitution == "chi":
        a0 = float(np.max(lam.sum(-1) / lam[:, 0]))
        rho = np.array([rho_star_lower_bound(row, k, a0)[0] for row in lam])
    else:
        raise ValueError(f"unknown substitution {substitution!r}")
    return rho, lam[:, 0], lam.sum(-1)


def _masked_norm(vals, q, vol):
    if vals.size == 0:
        return 0.0
    return float((np.sum(np.abs(vals) ** q) * vol) ** (1.0 / q))


def doubled_extension(u: GridFunction, shift: float = 0.0):
    """Extend ``u - shift`` by zero to the concentric ball of twice the radius.

    Returns the extended function on a grid aligned with ``u``'s grid and
    the index slices locating the original grid inside it.
    """
    dom = u.domain
    pts = np.stack([c[dom.active_mask] for c in dom.coords()], axis=-1)
    centre = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    radius = float(np.sqrt(((pts - centre) ** 2).sum(-1)).max())
    h = dom.h
    m = int(np.ceil(2 * radius / h)) + 1
    # snap the centre onto a node of the original grid so nodes coincide
    origin = np.asarray(dom.origin)
    ci = np.round((centre - origin) / h).astype(int)
    centre = origin + ci * h
    big = ball_domain(2 * radius, h, dim=dom.dim, centre=centre)
    m = (big.shape[0] - 1) // 2
    offset = ci - m
    vals = np.zeros(big.shape)
    sl = []
    for ax in range(dom.dim):
        lo = -offset[ax]
        sl.append(slice(lo, lo + dom.shape[ax]))
    sl = tuple(sl)
    sub = np.where(dom.interior_mask, u.values - shift, 0.0)
    vals[sl] = sub
    return GridFunction(big, vals), sl


def upper_contact_mask(u: GridFunction, k: int, envelope_tol: float = 1e-9) -> np.ndarray:
    """Upper k-contact set of ``u - sup_boundary u`` extended by zero to the doubled ball.

    Returned as a mask on ``u``'s grid, restricted to interior nodes where
    the shifted function is positive.
    """
    dom = u.domain
    shift = float(u.values[dom.boundary_mask].max())
    big, sl = doubled_extension(u, shift)
    res = upper_k_envelope(big, k, tol=envelope_tol)
    contact = res.contact_mask[sl] & dom.interior_mask & (u.values - shift > 0)
    return contact


def estimate_report(problem: ManufacturedProblem, theorem_id: str, k: int, p: float = np.inf,
                    q: float = 2.0, C0: float = 1.0, substitution: str = "dual",
                    contact_mask=None) -> EstimateReport:
    """Evaluate both sides of one maximum-principle estimate.

    Parameters
    ----------
    problem : ManufacturedProblem
    theorem_id : {"T1.1/Eq1.8", "T1.2/Eq1.9", "Eq2.10", "Eq2.12"}
    k : int
        Dual-cone index of the ellipticity hypothesis.
    p, q : float
        Integrability exponents of the drift and of the source.
    C0 : float
        Constant in the drift exponential.
    substitution : {"dual", "chi"}
        Source of the rho*_k weights.
    contact_mask : array, optional
        Precomputed upper contact set for ``Eq2.10``.
    """
    fld, u = problem.field, problem.u
    dom = u.domain
    n = dom.dim
    flags = hypothesis_flags(theorem_id, n, k, p, q)
    interior = dom.interior_mask
    rho, lmin, trace = dual_weights(fld, k, interior, substitution)
    flags["dual_cone"] = bool(np.all(rho > 0))
    flags["c_nonpositive"] = bool(np.all(fld.c[interior] <= 0))

    lhs = float(u.values[interior].max() - problem.boundary_sup)
    d = dom.diam
    vol = dom.cell_volume
    neg = np.maximum(-problem.f.values[interior], 0.0)
    bmag = np.sqrt((fld.b[interior] ** 2).sum(-1))
    info = {"diam": d}

    with np.errstate(divide="ignore", invalid="ignore"):
        src_w = np.where(rho > 0, neg / rho, np.inf)
        b_w = np.where(rho > 0, bmag / rho, np.inf)
        b2_w = np.where(rho > 0, bmag**2 / (rho * lmin), np.inf)

    if theorem_id == "Eq2.10":
        if contact_mask is None:
            contact_mask = upper_contact_mask(u, k)
        sel = np.asarray(contact_mask, bool)[interior]
        info["contact_nodes"] = int(sel.sum())
    else:
        sel = np.ones(neg.shape, dtype=bool)

    source = _masked_norm(src_w[sel], q, vol)
    if theorem_id == "T1.2/Eq1.9":
        R = _masked_norm((trace / rho), k, vol) ** (k / n)
        info["R"] = R
        info["R_trace_q"] = _masked_norm(trace / rho, q, vol) ** (q / n)
        scale = R
    else:
        scale = d
    geometry = scale ** (2.0 - n / q)

    if not np.any(bmag > 0):
        drift = 1.0
    elif theorem_id == "Eq2.12":
        drift = math.exp(C0 * d ** (2 * q - n) * _masked_norm(b2_w, q, vol) ** q)
    else:
        pn = p if np.isfinite(p) else np.inf
        bn = float(np.max(b_w[sel])) if pn == np.inf else _masked_norm(b_w[sel], pn, vol)
        expo = (1.0 - n / pn) * q if np.isfinite(pn) else q
        drift = math.exp(C0 * scale**expo * bn**q)

    denom = geometry * drift * source
    if lhs <= 0:
        req = 0.0
    elif denom > 0:
        req = lhs / denom
    else:
        req = np.inf
    return EstimateReport(theorem_id, n, k, float(p), float(q), dom.h, lhs, geometry, drift,
                          source, req, flags, info)


# -- Gronwall / Pucci iteration algebra -------------------------------------------


def gronwall_factor(theta: float, q: float, N=math.inf) -> float:
    """``((N/(N-theta))^N - 1)^(1/q)``, or ``(e^theta - 1)^(1/q)`` for infinite N."""
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if q <= 0:
        raise ValueError("q must be positive")
    if N == math.inf:
        base = math.expm1(theta)
    else:
        if N <= theta:
            raise ValueError("need N > theta")
        base = math.expm1(-N * math.log1p(-theta / N))
    return base ** (1.0 / q)


def gronwall_recurrence_check(alpha: float, mu: float, N: int):
    """Extremal sequence of ``y_i = alpha (sum_{j>i} y_j + mu)`` against its bound.

    Returns ``(y, bound, holds)`` with ``bound_i = alpha (1+alpha)^(N-i) mu``
    for ``i = 1..N`` (stored 0-based).
    """
    if alpha <= 0 or mu < 0 or N < 1:
        raise ValueError("need alpha > 0, mu >= 0, N >= 1")
    y = np.zeros(N)
    tail = 0.0
    for i in range(N - 1, -1, -1):
        y[i] = alpha * (tail + mu)
        tail += y[i]
    bound = alpha * (1.0 + alpha) ** (N - 1 - np.arange(N)) * mu
    holds = bool(np.all(y <= bound * (1 + 1e-12) + 1e-300))
    return y.tolist(), bound.tolist(), holds


# -- random coefficient fields ----------------------------------------------------


MODES = ("identity", "chi_positive", "dual_interior")


def _random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def _draw_spectrum(rng, n, k, mode, max_draws=10_000):
    for _ in range(max_draws):
        if mode == "chi_positive":
            top = min(chi_threshold(n, k), 4.0 * n)
            lam = np.sort(np.concatenate([[1.0], 1.0 + rng.random(n - 1) * (top - n)]))
            if chi(n, k, lam.sum() / lam[0]) > 0:
                return lam * math.exp(rng.normal(scale=0.3))
        else:
            lam = np.sort(np.exp(rng.normal(scale=0.5, size=n)))
            if k == 1:
                return np.full(n, lam[0])
            if is_dual_interior(lam, k):
                return lam
    raise RuntimeError(f"no admissible spectrum for mode={mode}, n={n}, k={k} after {max_draws} draws")


def _cayley(skew, theta):
    n = skew.shape[-1]
    eye = np.eye(n)
    S = theta[..., None, None] * skew
    return np.linalg.solve(eye - S, eye + S)


def sample_operator_field(seed: int, n: int, k: int, mode: str = "dual_interior",
                          domain: GridDomain | None = None, b_scale: float = 0.0,
                          c_scale: float = 0.0) -> SymmetricMatrixField:
    """Deterministic smooth coefficient field.

    Two admissible spectra are drawn and blended with a trigonometric weight;
    eigenvectors rotate smoothly through a Cayley transform.  Both
    admissibility conditions define convex sets of spectra, so every blend
    stays admissible.  ``b`` and ``c`` are smooth fields scaled by ``b_scale``
    and ``-c_scale`` (so ``c <= 0``).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if domain is None:
        domain = ball_domain(1.0, 1.0 / 16, dim=min(n, 2))
    rng = np.random.default_rng(seed)
    shape = domain.shape
    xs = domain.coords()
    if mode == "identity":
        A = np.broadcast_to(np.eye(n), shape + (n, n)).copy()
        return SymmetricMatrixField(domain, A, np.zeros(shape + (n,)), np.zeros(shape))

    def wave():
        om = rng.normal(size=domain.dim) * 2.0
        ph = rng.random() * 2 * np.pi
        return np.sin(sum(o * x for o, x in zip(om, xs)) + ph)

    lam0 = _draw_spectrum(rng, n, k, mode)
    lam1 = _draw_spectrum(rng, n, k, mode)
    t = 0.5 * (1.0 + wave())
    lam = (1 - t)[..., None] * lam0 + t[..., None] * lam1
    Q0 = _random_orthogonal(rng, n)
    K = rng.normal(size=(n, n))
    K = (K - K.T) / np.linalg.norm(K - K.T)
    Q = Q0 @ _cayley(K, 0.5 * wave())
    A = (Q * lam[..., None, :]) @ np.swapaxes(Q, -1, -2)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    b = np.stack([wave() for _ in range(n)], axis=-1) * b_scale
    c = -c_scale * 0.5 * (1.0 + wave())
    return SymmetricMatrixField(domain, A, b, c)


def sample_solution(seed: int, domain: GridDomain, modes: int = 3) -> GridFunction:
    """Smooth random function vanishing on the unit circle (or box edges).

    Built as ``(1 - |x|^2) * (a0 + sum of low trigonometric modes)`` so the
    interior maximum is positive and the boundary values are close to zero.
    """
    rng = np.random.default_rng(seed)
    xs = domain.coords()
    r2 = sum(x**2 for x in xs)
    s = np.full(domain.shape, 1.0 + rng.random())
    for _ in range(modes):
        om = rng.normal(size=domain.dim) * 2.0
        s += 0.4 * rng.normal() * np.cos(sum(o * x for o, x in zip(om, xs)) + 2 * np.pi * rng.random())
    return GridFunction(domain, (1.0 - r2) * s)


# -- discrete maximum principle -------------------------------------------------


def _stencil(fld: SymmetricMatrixField, h: float):
    """Neighbour coefficients of the 2-D 9-point (or 1-D 3-point) operator."""
    A, b, c = fld.A, fld.b, fld.c
    if fld.n == 1:
        a = A[..., 0, 0]
        coef = {(1,): a / h**2 + b[..., 0] / (2 * h), (-1,): a / h**2 - b[..., 0] / (2 * h)}
        centre = -2 * a / h**2 + c
        return coef, centre
    a11, a22, a12 = A[..., 0, 0], A[..., 1, 1], A[..., 0, 1]
    coef = {
        (1, 0): a11 / h**2 + b[..., 0] / (2 * h),
        (-1, 0): a11 / h**2 - b[..., 0] / (2 * h),
        (0, 1): a22 / h**2 + b[..., 1] / (2 * h),
        (0, -1): a22 / h**2 - b[..., 1] / (2 * h),
        (1, 1): a12 / (2 * h**2),
        (-1, -1): a12 / (2 * h**2),
        (1, -1): -a12 / (2 * h**2),
        (-1, 1): -a12 / (2 * h**2),
    }
    centre = -2 * (a11 + a22) / h**2 + c
    return coef, centre


def monotone_nodes(fld: SymmetricMatrixField) -> np.ndarray:
    """Interior nodes whose stencil has non-negative off-centre weights."""
    coef, centre = _stencil(fld, fld.domain.h)
    ok = centre < 0
    for v in coef.values():
        ok &= v >= -1e-14 * np.abs(centre)
    return ok & fld.domain.interior_mask


def _shift(w, off):
    out = np.zeros_like(w)
    src = tuple(slice(max(o, 0), w.shape[i] + min(o, 0)) for i, o in enumerate(off))
    dst = tuple(slice(max(-o, 0), w.shape[i] + min(-o, 0)) for i, o in enumerate(off))
    out[dst] = w[src]
    return out


def jacobi_dirichlet_solve(fld: SymmetricMatrixField, f, g, tol: float = 1e-12,
                           max_iter: int = 200_000):
    """Solve ``L_h u = f`` inside, ``u = g`` on the boundary, by Jacobi iteration.

    Intended for monotone stencils (see :func:`monotone_nodes`), where the
    iteration converges and the discrete maximum principle holds.
    """
    dom = fld.domain
    f = f.values if isinstance(f, GridFunction) else np.broadcast_to(f, dom.shape)
    g = g.values if isinstance(g, GridFunction) else np.broadcast_to(g, dom.shape)
    coef, centre = _stencil(fld, dom.h)
    interior = dom.interior_mask
    u = np.where(interior, 0.0, g).astype(float)
    safe_centre = np.where(interior, centre, -1.0)
    scale = max(1.0, float(np.abs(g).max()))
    for it in range(1, max_iter + 1):
        acc = np.zeros_like(u)
        for off, v in coef.items():
            acc += v * _shift(u, off)
        new = np.where(interior, (f - acc) / safe_centre, u)
        diff = float(np.abs(new - u).max())
        u = new
        if diff < tol * scale:
            break
    return GridFunction(dom, u), it

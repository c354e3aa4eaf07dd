"""The acceptance battery.

Each ``criterion_N`` runs one seeded, deterministic check and returns a
:class:`CriterionResult` whose metrics are plain floats, ints and bools, so
that reports serialise byte-identically for a given seed.  ``quick=True``
shrinks sample counts and meshes for smoke runs.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .abp import (
    ManufacturedProblem,
    estimate_report,
    gronwall_factor,
    gronwall_recurrence_check,
    sample_operator_field,
    sample_solution,
    upper_contact_mask,
)
from .dual_cone import (
    Status,
    certificate_is_valid,
    is_dual_interior,
    rho_star,
    upper_bound_1_7,
)
from .ellipticity import chi, chi_threshold, rho_star_lower_bound, side_condition
from .envelope import gradient_estimate_check, upper_k_envelope
from .grid import GridFunction, SymmetricMatrixField, ball_domain, unit_square
from .oracles import brute_force_rho_star, hull_concave_envelope
from .spectral import eigenvalues

SUITE_SCHEMA = "garding-suite-v1"

# ABP constant with the concave envelope taken on the doubled ball: the
# supporting-plane argument loses a factor 3/2 against d / (n omega_n^(1/n)).
ABP_DOUBLED_CONSTANT_2D = 3.0 / (4.0 * math.sqrt(math.pi))


@dataclass
class CriterionResult:
    id: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _clean(
            {
                "id": self.id,
                "title": self.title,
                "passed": self.passed,
                "metrics": self.metrics,
                "tolerances": self.tolerances,
                "notes": self.notes,
            }
        )

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{tag}] criterion {self.id} ({self.title}): {shown}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _rng(seed, cid):
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, cid])


def _positive_spectrum(rng, n, spread=0.35):
    return np.exp(rng.normal(scale=spread, size=n))


def _interior_sample(rng, n, k, margin=1e-6, spread=0.35, attempts=200):
    """Positive spectrum interior to the dual cone, with its rho*_k result."""
    for _ in range(attempts):
        lam = _positive_spectrum(rng, n, spread)
        res = rho_star(lam, k)
        if res.bounded and res.value > margin * np.linalg.norm(lam):
            return lam, res
    raise RuntimeError(f"no interior sample for n={n}, k={k}")


# -- 1, 2: closed-form dual identities ---------------------------------------------


def criterion_1(seed=0, quick=False) -> CriterionResult:
    rng = _rng(seed, 1)
    count = 20 if quick else 200
    worst, bad = 0.0, 0
    for i in range(count):
        n = 2 + i % 4
        lam = _positive_spectrum(rng, n, spread=1.0)
        res = rho_star(lam, n)
        scale = float(np.linalg.norm(lam))
        err = abs(res.value - math.exp(np.mean(np.log(lam)))) / scale
        worst = max(worst, err)
        bad += err > 1e-6 or not res.bounded
    return CriterionResult(
        1, "rho*_n equals det^(1/n)", bad == 0,
        {"samples": count, "max_rel_error": worst, "failures": bad},
        {"abs_error_per_norm": 1e-6},
    )


def criterion_2(seed=0, quick=False) -> CriterionResult:
    rng = _rng(seed, 2)
    count = 20 if quick else 200
    ray_err, ray_bad, cert_bad = 0.0, 0, 0
    for i in range(count):
        n = 2 + i % 4
        t = float(np.exp(rng.uniform(-4, 4)))
        res = rho_star(np.full(n, t), 1)
        err = abs(res.value - t)
        ray_err = max(ray_err, err / max(1.0, t))
        ray_bad += err > 1e-10 * max(1.0, t) or res.status is not Status.OPTIMAL
        lam = rng.normal(size=n) + (rng.random() < 0.5) * 3.0
        if np.ptp(lam) == 0:
            continue
        res = rho_star(lam, 1)
        ok = res.status is Status.UNBOUNDED_BELOW and certificate_is_valid(lam, 1, res.certificate)
        cert_bad += not ok
    return CriterionResult(
        2, "rho*_1 is lambda_min on the ray, unbounded off it", ray_bad == 0 and cert_bad == 0,
        {"samples": count, "max_ray_error": ray_err, "ray_failures": ray_bad,
         "certificate_failures": cert_bad},
        {"ray_abs_error": 1e-10},
    )


# -- 3: the comparison upper bound -----------------------------------------------------


def remark_ray(n, k):
    """``lam_i = 1`` for ``i <= k`` and ``k`` otherwise, where the upper bound is sharp."""
    return np.array([1.0] * k + [float(k)] * (n - k))


def criterion_3(seed=0, quick=False) -> CriterionResult:
    rng = _rng(seed, 3)
    per = 20 if quick else 500
    worst_excess, bad, worst_ray = -np.inf, 0, 0.0
    configs = [(n, k) for n in range(2, 6) for k in range(2, n + 1)]
    for n, k in configs:
        for _ in range(per):
            lam, res = _interior_sample(rng, n, k)
            excess = (res.value - upper_bound_1_7(lam, k)) / np.linalg.norm(lam)
            worst_excess = max(worst_excess, excess)
            bad += excess > 1e-6
    for n in range(2, 6):
        for k in range(1, n + 1):
            lam = remark_ray(n, k)
            ub = upper_bound_1_7(lam, k)
            worst_ray = max(worst_ray, abs(rho_star(lam, k).value - ub) / ub)
    return CriterionResult(
        3, "upper bound holds, sharp on the extremal ray", bad == 0 and worst_ray <= 1e-5,
        {"configs": len(configs), "samples_per_config": per, "max_excess_per_norm": worst_excess,
         "failures": bad, "max_ray_rel_gap": worst_ray},
        {"slack_per_norm": 1e-6, "ray_rel": 1e-5},
    )


# -- 4: brute-force oracle -------------------------------------------------------


def criterion_4(seed=0, quick=False) -> CriterionResult:
    rng = _rng(seed, 4)
    per = 2 if quick else 50
    worst, bad = 0.0, 0
    for n, k in [(2, 2), (3, 2), (3, 3)]:
        for _ in range(per):
            lam, res = _interior_sample(rng, n, k)
            ref = brute_force_rho_star(lam, k, step=1e-3)
            err = abs(res.value - ref)
            worst = max(worst, err)
            bad += err > 5e-3
    return CriterionResult(
        4, "rho*_k matches the slice-grid oracle", bad == 0,
        {"samples_per_config": per, "max_abs_error": worst, "failures": bad},
        {"abs_error": 5e-3, "grid_step": 1e-3},
    )


# -- 5: structural properties ----------------------------------------------------------


def _value(lam, k):
    return rho_star(lam, k).as_float()


def criterion_5(seed=0, quick=False) -> CriterionResult:
    rng = _rng(seed, 5)
    count = 10 if quick else 200
    fails = {"monotone_in_k": 0, "nesting": 0, "homogeneity": 0, "concavity": 0,
             "permutation": 0, "openness": 0}
    worst_hom = 0.0
    for i in range(count):
        n = 2 + i % 4
        k = int(rng.integers(2, n + 1))
        lam, res = _interior_sample(rng, n, k, margin=1e-3)
        scale = float(np.linalg.norm(lam))
        v = res.value
        chain = [_value(lam, j) for j in range(1, n + 1)]
        chain[k - 1] = v
        if any(chain[j] < chain[j - 1] - 1e-7 * scale for j in range(1, n)):
            fails["monotone_in_k"] += 1
        if any(chain[j - 1] <= 1e-6 * scale for j in range(k, n + 1)):
            fails["nesting"] += 1
        for t in (0.1, 3.0, 10.0):
            rel = abs(_value(t * lam, k) - t * v) / (t * v)
            worst_hom = max(worst_hom, rel)
            fails["homogeneity"] += rel > 1e-7
        perm = rng.permutation(n)
        fails["permutation"] += abs(_value(lam[perm], k) - v) > 1e-9 * scale
        step = 1e-4 * scale
        for j in range(n):
            for sgn in (1.0, -1.0):
                e = np.zeros(n)
                e[j] = sgn * step
                if not is_dual_interior(lam + e, k):
                    fails["openness"] += 1
    pairs = 0
    for i in range(count):
        n = 2 + i % 4
        k = int(rng.integers(2, n + 1))
        a, ra = _interior_sample(rng, n, k)
        b, rb = _interior_sample(rng, n, k)
        mid = _value(0.5 * (a + b), k)
        pairs += 1
        scale = max(np.linalg.norm(a), np.linalg.norm(b))
        if mid < 0.5 * (ra.value + rb.value) - 1e-6 * scale:
            fails["concavity"] += 1
    metrics = {"samples": count, "concavity_pairs": pairs, "max_homogeneity_rel": worst_hom}
    metrics.update({f"{k}_failures": v for k, v in fails.items()})
    return CriterionResult(
        5, "monotonicity, nesting, homogeneity, concavity, symmetry, openness",
        all(v == 0 for v in fails.values()), metrics,
        {"monotone_per_norm": 1e-7, "homogeneity_rel": 1e-7, "concavity_per_norm": 1e-6,
         "permutation_per_norm": 1e-9, "openness_step_per_norm": 1e-4},
    )


# -- 6: trace-ratio ellipticity ----------------------------------------------------------


def _matrix_with_ratio(rng, n, a0):
    rest = rng.dirichlet(np.ones(n - 1)) * (a0 - n)
    lam = np.concatenate([[1.0], 1.0 + rest]) * math.exp(rng.normal(scale=0.5))
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    return (q * lam) @ q.T


def criterion_6(seed=0, quick=False) -> CriterionResult:
    rng = _rng(seed, 6)
    count = 20 if quick else 200
    configs = [(n, k) for n in range(2, 6) for k in range(2, n + 1)]
    not_interior, bound_bad, side_cases, worst = 0, 0, 0, -np.inf
    drawn = 0
    while drawn < count:
        n, k = configs[drawn % len(configs)]
        top = chi_threshold(n, k)
        if k < n and rng.random() < 0.5:
            lo = max(float(n), (n * (n - 1) - (k - 1) / (n - 1)) / (n - k))
            a0 = rng.uniform(lo, top)
        else:
            a0 = rng.uniform(n, min(top, 4.0 * n))
        A = _matrix_with_ratio(rng, n, a0)
        lam = eigenvalues(A)
        ratio = lam.sum() / lam[0]
        if chi(n, k, ratio) <= 0:
            continue
        drawn += 1
        res = rho_star(lam, k)
        if not (res.bounded and is_dual_interior(lam, k)):
            not_interior += 1
            continue
        bound, valid = rho_star_lower_bound(lam, k)
        if valid:
            side_cases += 1
            gap = (res.value - bound) / np.linalg.norm(lam)
            worst = max(worst, -gap)
            bound_bad += gap < -1e-6
    return CriterionResult(
        6, "positive chi implies dual interior; lower bound under the side condition",
        not_interior == 0 and bound_bad == 0 and side_cases > 0,
        {"matrices": count, "not_interior": not_interior, "side_condition_cases": side_cases,
         "bound_failures": bound_bad, "max_bound_shortfall_per_norm": worst},
        {"bound_slack_per_norm": 1e-6, "membership_tol": 1e-6},
    )


# -- 7: Gronwall algebra ----------------------------------------------------------------


def criterion_7(seed=0, quick=False) -> CriterionResult:
    worst_sum, holds_bad = 0.0, 0
    for a in np.round(np.arange(1, 21) * 0.1, 10):
        for N in range(1, 21):
            y, _, holds = gronwall_recurrence_check(float(a), 1.0, N)
            exact = (1.0 + a) ** N - 1.0
            worst_sum = max(worst_sum, abs(math.fsum(y) - exact) / exact)
            holds_bad += not holds
    g10 = gronwall_factor(1.0, 1.0, 10)
    limit = gronwall_factor(1.0, 1.0)
    g6 = gronwall_factor(1.0, 1.0, 10**6)
    ns = [10, 100, 1000, 10**4, 10**5, 10**6]
    seq = [gronwall_factor(1.0, 1.0, N) for N in ns]
    decreasing = all(b < a for a, b in zip(seq, seq[1:])) and seq[-1] > limit
    conv_abs = g6 - limit
    conv_rel = conv_abs / limit
    passed = (holds_bad == 0 and worst_sum <= 1e-12 and abs(g10 - 1.86797) <= 1e-5
              and decreasing and conv_rel <= 1e-6)
    return CriterionResult(
        7, "Gronwall recurrence and factor", passed,
        {"recurrence_failures": holds_bad, "max_sum_rel_error": worst_sum, "factor_N10": g10,
         "factor_N1e6_minus_limit": conv_abs, "factor_N1e6_rel_gap": conv_rel,
         "decreasing_in_N": decreasing},
        {"sum_rel": 1e-12, "factor_abs": 1e-5, "convergence_rel": 1e-6},
        ["convergence is measured relative to e - 1; the absolute gap is e/(2N) ~ 1.36e-6"],
    )


# -- 8: envelopes against the hull oracle -------------------------------------------------


def random_bumps(seed: int, domain, bumps: int = 4) -> GridFunction:
    """Gaussian bumps of random sign, centre and width, times a bubble.

    The bubble ``16 x (1 - x) y (1 - y)`` makes the function vanish on the
    edges of the unit square, so the boundary data lie on the concave hull
    and the fixed-boundary envelope and the hull oracle describe the same
    object.
    """
    rng = np.random.default_rng(seed)
    xs = domain.coords()
    vals = np.zeros(domain.shape)
    for _ in range(bumps):
        c = rng.uniform(0.2, 0.8, size=domain.dim)
        w = rng.uniform(0.08, 0.25)
        amp = rng.normal()
        vals += amp * np.exp(-sum((x - ci) ** 2 for x, ci in zip(xs, c)) / (2 * w * w))
    bubble = np.prod([4 * x * (1 - x) for x in xs], axis=0)
    return GridFunction(domain, vals * bubble)


def criterion_8(seed=0, quick=False) -> CriterionResult:
    h = 1.0 / 16 if quick else 1.0 / 64
    count = 3 if quick else 20
    dom = unit_square(h)
    worst, worst_major, worst_idem, bad, unconverged = 0.0, 0.0, 0.0, 0, 0
    for i in range(count):
        u = random_bumps(int(seed) * 1000 + i, dom)
        osc = u.osc()
        res = upper_k_envelope(u, 2)
        w = res.envelope.values
        hull = hull_concave_envelope(dom.coords(), u.values)
        err = float(np.abs(w - hull).max()) / osc
        worst = max(worst, err)
        bad += err > 5e-3
        worst_major = max(worst_major, float((u.values - w).max()) / osc)
        again = upper_k_envelope(res.envelope, 2).envelope.values
        worst_idem = max(worst_idem, float(np.abs(again - w).max()) / osc)
        unconverged += not res.converged
    invariants_ok = worst_major <= 1e-8 and worst_idem <= 1e-6 and unconverged == 0
    return CriterionResult(
        8, "concave envelope matches the hull oracle", bad == 0 and invariants_ok,
        {"functions": count, "h": h, "max_error_per_osc": worst, "oracle_failures": bad,
         "max_majorant_violation_per_osc": worst_major,
         "max_idempotence_gap_per_osc": worst_idem, "unconverged": unconverged},
        {"oracle_per_osc": 5e-3, "majorant_per_osc": 1e-8, "idempotence_per_osc": 1e-6},
    )


# -- 9: maximum-principle estimates ----------------------------------------------------------


def paraboloid_problem(h: float) -> ManufacturedProblem:
    dom = ball_domain(1.0, h)
    fld = sample_operator_field(0, 2, 2, "identity", domain=dom)
    u = GridFunction.from_callable(dom, lambda x, y: 1.0 - x * x - y * y)
    return ManufacturedProblem.from_solution(fld, u)


def _variation(values):
    values = np.asarray(values, dtype=float)
    return float(values.max() / values.min() - 1.0)


def radial_drift_field(fld: SymmetricMatrixField, t: float) -> SymmetricMatrixField:
    """Copy of ``fld`` with the inward drift ``b = -t x``."""
    b = -t * np.stack(fld.domain.coords(), axis=-1)
    return SymmetricMatrixField(fld.domain, fld.A.copy(), b, fld.c.copy())


def drift_sweep(field: SymmetricMatrixField, u: GridFunction, k: int, q: float = 2.0,
                scales=(0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0), calibrate_upto: float = 0.5):
    """Fit one ``C0`` on small drifts and test it on the larger ones.

    Returns the calibrated ``C0`` and per-scale rows ``(t, ratio, predicted)``
    where ``ratio = lhs / (geometry * source)`` and
    ``predicted = ratio(0) * drift_factor(C0)``.
    """
    contact = upper_contact_mask(u, k)
    rows = []
    for t in scales:
        pb = ManufacturedProblem.from_solution(radial_drift_field(field, t), u)
        r = estimate_report(pb, "Eq2.10", k, q=q, C0=1.0, contact_mask=contact)
        ratio = r.lhs / (r.geometry_factor * r.source_norm)
        rows.append((t, ratio, math.log(r.drift_factor)))
    base = rows[0][1]
    C0 = 0.0
    for t, ratio, beta in rows:
        if 0 < t <= calibrate_upto and beta > 0:
            C0 = max(C0, math.log(ratio / base) / beta)
    out = [(t, ratio, base * math.exp(C0 * beta)) for t, ratio, beta in rows]
    return C0, out


def criterion_9(seed=0, quick=False) -> CriterionResult:
    meshes = (1 / 8, 1 / 16, 1 / 32) if quick else (1 / 16, 1 / 32, 1 / 64)
    metrics, notes = {}, []
    ok = True
    vals, lhs_ok = [], True
    for h in meshes:
        r = estimate_report(paraboloid_problem(h), "T1.1/Eq1.8", 2, q=2)
        vals.append(r.required_C)
        lhs_ok &= abs(r.lhs - 1.0) <= 2 * h
    var = _variation(vals)
    metrics["paraboloid_C_finest"] = vals[-1]
    metrics["paraboloid_variation"] = var
    metrics["paraboloid_lhs_ok"] = bool(lhs_ok)
    ok &= var < 0.2
    ok &= lhs_ok

    count = 4 if quick else 50
    h = 1 / 8 if quick else 1 / 16
    dom = ball_domain(1.0, h)
    for k in (2, 1):
        cs = []
        for i in range(count):
            s = int(seed) * 1000 + i
            fld = sample_operator_field(s, 2, k, "dual_interior", domain=dom)
            u = sample_solution(s + 500, dom)
            r = estimate_report(ManufacturedProblem.from_solution(fld, u), "Eq2.10", k, q=2)
            cs.append(r.required_C)
        cmax = float(np.max(cs))
        metrics[f"seeded_max_C_k{k}"] = cmax
        ok &= cmax <= ABP_DOUBLED_CONSTANT_2D

    worst = -np.inf
    for k in (2, 1):
        fld = sample_operator_field(int(seed) + 7, 2, k, "dual_interior", domain=dom)
        u = GridFunction.from_callable(dom, lambda x, y: 1.0 - x * x - y * y)
        C0, rows = drift_sweep(fld, u, k)
        metrics[f"drift_C0_k{k}"] = C0
        metrics[f"drift_ratio_growth_k{k}"] = rows[-1][1] / rows[0][1]
        for t, ratio, pred in rows:
            worst = max(worst, ratio / pred - 1.0)
    metrics["drift_max_excess"] = worst
    ok &= worst <= 1e-9
    return CriterionResult(
        9, "ABP estimate reports", bool(ok), metrics,
        {"mesh_variation": 0.2, "lhs_abs": "2h", "seeded_bound": ABP_DOUBLED_CONSTANT_2D,
         "drift_rel": 1e-9},
        notes,
    )


# -- 10: gradient estimate -------------------------------------------------------------------


def sample_subharmonic(seed: int, domain) -> GridFunction:
    """Random 1-convex function with a discretely non-negative Laplacian.

    A quadratic with positive trace plus harmonic cubics and quartics plus a
    convex exponential; each piece has a non-negative 5-point Laplacian.
    """
    rng = np.random.default_rng(seed)
    x, y = domain.coords()
    a = rng.uniform(-1.0, 1.0)
    c = rng.uniform(-0.5, 0.5)
    tr = rng.uniform(0.5, 1.5)
    quad = 0.5 * ((tr + a) * x * x + (tr - a) * y * y) + c * x * y
    z = x + 1j * y
    harm = rng.normal() * (z**3).real + rng.normal() * (z**4).real + rng.normal() * (z**3).imag
    g = rng.normal(size=2)
    return GridFunction(domain, quad + 0.3 * harm + 0.2 * np.exp(g[0] * x + g[1] * y))


def criterion_10(seed=0, quick=False) -> CriterionResult:
    meshes = (1 / 16, 1 / 32, 1 / 64)
    count = 3 if quick else 10
    n, k, r = 2, 1, 1.5
    worst, bad, flags_bad = 0.0, 0, 0
    for i in range(count):
        cs = []
        for h in meshes:
            dom = ball_domain(1.0, h)
            est = gradient_estimate_check(sample_subharmonic(int(seed) * 1000 + i, dom), k, r)
            cs.append(est.required_C)
            flags_bad += not (est.k_convex and est.exponent_ok)
        var = _variation(cs)
        worst = max(worst, var)
        bad += var >= 0.2
    return CriterionResult(
        10, "gradient estimate is mesh-stable", bad == 0 and flags_bad == 0,
        {"functions": count, "r": r, "r_limit": n * k / (n - k), "max_variation": worst,
         "unstable": bad, "flag_failures": flags_bad},
        {"mesh_variation": 0.2},
    )


# -- 11: determinism ---------------------------------------------------------------------------


def canonical_json(report: dict) -> str:
    body = {k: v for k, v in report.items() if k != "timestamp"}
    return json.dumps(body, sort_keys=True, indent=2)


def criterion_11(seed=0, quick=False) -> CriterionResult:
    ids = list(range(1, 11))
    first = canonical_json(run_suite(seed, quick=True, ids=ids))
    second = canonical_json(run_suite(seed, quick=True, ids=ids))
    same = first == second
    return CriterionResult(
        11, "suite reports are reproducible", same,
        {"bytes": len(first.encode()), "identical": same},
        {"comparison": "byte-exact"},
    )


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}

RUNTIME_LIMITS = {1: 30, 2: 5, 3: 120, 4: 300, 5: 120, 6: 120, 7: 10, 8: 300, 9: 600,
                  10: 180, 11: 60}


def run_suite(seed: int = 0, quick: bool = False, ids=None, workers: int = 1,
              timestamp: str | None = None) -> dict:
    """Run the selected criteria and aggregate their results in id order."""
    ids = sorted(CRITERIA) if ids is None else sorted(ids)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda i: CRITERIA[i](seed, quick), ids))
    return {
        "schema": SUITE_SCHEMA,
        "seed": int(seed),
        "quick": bool(quick),
        "timestamp": timestamp,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }

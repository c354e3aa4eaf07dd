"""Command-line front end.

Every subcommand prints one JSON document (or CSV table) on stdout.  Flags
override values from ``--config FILE``; the seed falls back to the
``GARDING_SEED`` environment variable.  Exit codes: 0 success, 2 bad input
or parameters, 3 hypothesis violation under ``--strict``, 4 numerical
non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import acceptance
from .abp import (
    THEOREMS,
    ManufacturedProblem,
    estimate_report,
    gronwall_factor,
    hypothesis_flags,
    reports_to_csv,
    sample_operator_field,
    sample_solution,
)
from .dual_cone import DEFAULT_TOL, MEMBERSHIP_TOL, dual_membership, rho_star, upper_bound_1_7
from .ellipticity import chi, chi_threshold, side_condition
from .envelope import upper_k_envelope
from .grid import GridFunction, ball_domain
from .sym_poly import MAX_DIM, gamma_k_membership

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_NUMERICAL = 0, 2, 3, 4
COMMANDS = ("rho-star", "membership", "sharpness", "chi", "envelope", "abp", "gronwall", "suite")

DEFAULTS = {
    "lambda": None,
    "k": None,
    "n": None,
    "p": math.inf,
    "q": 2.0,
    "tol": None,
    "seed": None,
    "input": None,
    "output": None,
    "format": "json",
    "theta": "0,0.5,1,2,4",
    "N": "10,100,1000,inf",
    "strict": False,
    "theorem": "Eq2.10",
    "count": 5,
    "h": 1.0 / 16,
    "quick": False,
    "workers": 1,
    "a0_min": None,
    "a0_max": None,
    "steps": 9,
    "criteria": None,
}


class CliError(Exception):
    def __init__(self, code, message, **extra):
        super().__init__(message)
        self.code = code
        self.payload = {"error": message, "exit_code": code, **extra}


@dataclass
class RunConfig:
    subcommand: str
    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError as exc:
            raise AttributeError(name) from exc


# -- parsing -------------------------------------------------------------------------


def _float_list(text):
    try:
        return [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"not a comma-separated list of numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="garding", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    # every default is None so that config-file values survive unless a flag is given
    common.add_argument("--config", help="JSON file of option values")
    common.add_argument("--lambda", dest="lambda", help="eigenvalues, comma separated, any order")
    common.add_argument("--k", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--strict", action="store_true", default=None)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "gronwall":
            p.add_argument("--theta")
            p.add_argument("--N", dest="N")
        if name == "abp":
            p.add_argument("--theorem", choices=THEOREMS)
            p.add_argument("--count", type=int)
            p.add_argument("--h", type=float)
        if name == "chi":
            p.add_argument("--a0-min", dest="a0_min", type=float)
            p.add_argument("--a0-max", dest="a0_max", type=float)
            p.add_argument("--steps", type=int)
        if name == "sharpness":
            p.add_argument("--steps", type=int)
        if name == "suite":
            p.add_argument("--quick", action="store_true", default=None)
            p.add_argument("--workers", type=int)
            p.add_argument("--criteria", help="comma-separated criterion ids")
    return parser


def load_config(argv=None, environ=None) -> RunConfig:
    """Parse flags, merge them over the config file and defaults."""
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("subcommand", "config")}
    values = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_INPUT, f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(from_file, dict):
            raise CliError(EXIT_INPUT, "config file must hold a JSON object")
        values.update({k.replace("-", "_") if k != "lambda" else k: v for k, v in from_file.items()})
    values.update(flags)
    if values["seed"] is None:
        env = environ.get("GARDING_SEED")
        try:
            values["seed"] = int(env) if env is not None else 0
        except ValueError as exc:
            raise CliError(EXIT_INPUT, f"GARDING_SEED is not an integer: {env!r}") from exc
    values["seed"] = int(values["seed"]) & 0xFFFFFFFFFFFFFFFF
    cfg = RunConfig(args.subcommand, values)
    validate(cfg)
    return cfg


def _violation(message, hypothesis):
    return CliError(EXIT_INPUT, message, hypothesis=hypothesis)


def _spectrum(cfg):
    if cfg.values["lambda"] is None:
        raise _violation("--lambda is required", "lambda given")
    raw = cfg.values["lambda"]
    lam = np.asarray(raw if isinstance(raw, list) else _float_list(raw), dtype=float)
    if not 2 <= lam.size <= MAX_DIM:
        raise _violation(f"need 2..{MAX_DIM} eigenvalues, got {lam.size}", "2 <= n <= 8")
    if not np.all(np.isfinite(lam)):
        raise _violation("eigenvalues must be finite", "finite lambda")
    return np.sort(lam)


def validate(cfg: RunConfig) -> None:
    """Range checks before dispatch; raises :class:`CliError` naming the hypothesis."""
    v = cfg.values
    if v["tol"] is not None and not v["tol"] > 0:
        raise _violation("tol must be positive", "tol > 0")
    if v["q"] is not None and not float(v["q"]) >= 1:
        raise _violation("q must be at least 1", "q >= 1")
    if v["p"] is not None and not float(v["p"]) >= 1:
        raise _violation("p must be at least 1", "p >= 1")
    if cfg.subcommand in ("rho-star", "membership"):
        lam = _spectrum(cfg)
        if cfg.subcommand == "rho-star" and v["k"] is None:
            raise _violation("--k is required", "k given")
        if v["k"] is not None and not 1 <= v["k"] <= lam.size:
            raise _violation(f"k={v['k']} outside 1..{lam.size}", "1 <= k <= n")
    if cfg.subcommand in ("sharpness", "chi"):
        if v["n"] is None or v["k"] is None:
            raise _violation("--n and --k are required", "n and k given")
        if not 2 <= v["n"] <= MAX_DIM:
            raise _violation(f"n={v['n']} outside 2..{MAX_DIM}", "2 <= n <= 8")
        lo = 2 if cfg.subcommand == "chi" else 1
        if not lo <= v["k"] <= v["n"]:
            raise _violation(f"k={v['k']} outside {lo}..{v['n']}", f"{lo} <= k <= n")
    if cfg.subcommand == "envelope":
        if v["k"] is None:
            raise _violation("--k is required", "k given")
        if v["input"] is None:
            raise _violation("--input is required", "input given")
    if cfg.subcommand == "abp":
        n = 2 if v["n"] is None else v["n"]
        v["n"] = n
        if n not in (1, 2):
            raise _violation("grid problems are 1D or 2D", "n in {1, 2}")
        if v["k"] is None:
            v["k"] = n
        if not 1 <= v["k"] <= n:
            raise _violation(f"k={v['k']} outside 1..{n}", "1 <= k <= n")
        if v["count"] < 1 or not v["h"] > 0:
            raise _violation("count must be positive and h > 0", "count >= 1, h > 0")
    if cfg.subcommand == "gronwall":
        for t in _float_list(v["theta"]):
            if t < 0:
                raise _violation("theta must be non-negative", "theta >= 0")
        for N in str(v["N"]).split(","):
            if N.strip() != "inf" and float(N) < 1:
                raise _violation("N must be a positive integer or inf", "N >= 1")


# -- subcommands -------------------------------------------------------------------


def cmd_rho_star(cfg):
    lam = _spectrum(cfg)
    tol = cfg.tol or DEFAULT_TOL
    res = rho_star(lam, cfg.k, tol=tol)
    out = {"lambda": lam.tolist(), "k": cfg.k, "tol": tol, **res.to_dict()}
    if res.bounded and res.duality_gap_estimate > 10 * tol * np.linalg.norm(lam):
        raise CliError(EXIT_NUMERICAL, "barrier method did not reach the requested gap", result=out)
    return out


def cmd_membership(cfg):
    lam = _spectrum(cfg)
    tol = cfg.tol or MEMBERSHIP_TOL
    ks = [cfg.k] if cfg.k is not None else list(range(1, lam.size + 1))
    rows = []
    for k in ks:
        rows.append({
            "k": k,
            "gamma": gamma_k_membership(lam, k, tol=min(tol, 1e-10)).membership.value,
            "dual": dual_membership(lam, k, tol=tol).membership.value,
            "tol": tol,
        })
    return {"lambda": lam.tolist(), "tol": tol, "rows": rows}


def cmd_sharpness(cfg):
    """Sweep ``(1,...,1, s,...,s)`` (k ones) through the extremal point ``s = k``."""
    n, k, steps = cfg.n, cfg.k, max(2, int(cfg.steps))
    tol = cfg.tol or DEFAULT_TOL
    rows = []
    for s in np.linspace(0.5 * k if k > 1 else 1.0, 2.0 * k, steps):
        lam = np.array([1.0] * k + [float(s)] * (n - k))
        r = rho_star(lam, k, tol=tol)
        ub = upper_bound_1_7(lam, k)
        val = r.as_float()
        rows.append({"s": float(s), "rho_star": val, "upper_bound": ub,
                     "relative_gap": (ub - val) / ub, "status": r.status.value, "tol": tol})
    return {"n": n, "k": k, "extremal_s": float(k), "tol": tol, "rows": rows}


def cmd_chi(cfg):
    n, k, steps = cfg.n, cfg.k, max(2, int(cfg.steps))
    top = chi_threshold(n, k)
    lo = cfg.a0_min if cfg.a0_min is not None else float(n)
    hi = cfg.a0_max if cfg.a0_max is not None else (top if np.isfinite(top) else 4.0 * n)
    if not 0 < lo < hi:
        raise _violation("need 0 < a0_min < a0_max", "0 < a0_min < a0_max")
    rows = []
    for a0 in np.linspace(lo, hi, steps):
        x = chi(n, k, a0)
        rows.append({"a0": float(a0), "chi": x, "side_condition": bool(x > 0 and side_condition(n, k, a0)),
                     "bound_factor": x * a0 / (n * (k - 1)), "tol": 0.0})
    return {"n": n, "k": k, "chi_threshold": top, "tol": 0.0, "rows": rows}


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc}") from exc


def cmd_envelope(cfg):
    data = _read_json(cfg.input)
    try:
        u = GridFunction.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"not a grid function: {exc}") from exc
    if not 1 <= cfg.k <= u.domain.dim:
        raise _violation(f"k={cfg.k} outside 1..{u.domain.dim}", "1 <= k <= dim")
    tol = cfg.tol or 1e-10
    res = upper_k_envelope(u, cfg.k, tol=tol)
    out = {"k": cfg.k, "tol": tol, **res.to_dict()}
    if not res.converged:
        raise CliError(EXIT_NUMERICAL, "envelope iteration hit max_iter", result=out)
    return out


def cmd_abp(cfg):
    n, k, p, q = cfg.n, cfg.k, float(cfg.p), float(cfg.q)
    flags = hypothesis_flags(cfg.theorem, n, k, p, q)
    bad = [name for name, ok in flags.items() if not ok]
    if cfg.strict and bad:
        raise CliError(EXIT_HYPOTHESIS, "hypothesis violated", hypothesis=bad)
    dom = ball_domain(1.0, cfg.h, dim=n)
    reports = []
    for i in range(cfg.count):
        s = (cfg.seed + i) & 0xFFFFFFFFFFFFFFFF
        fld = sample_operator_field(s, n, k, "dual_interior", domain=dom)
        u = sample_solution(s ^ 0x5EED, dom)
        reports.append(estimate_report(ManufacturedProblem.from_solution(fld, u), cfg.theorem, k, p=p, q=q))
    if cfg.strict:
        bad = sorted({f for r in reports for f, ok in r.hypothesis_flags.items() if not ok})
        if bad:
            raise CliError(EXIT_HYPOTHESIS, "hypothesis violated", hypothesis=bad)
    return {"theorem_id": cfg.theorem, "seed": cfg.seed, "tol": DEFAULT_TOL, "reports": reports}


def cmd_gronwall(cfg):
    q = float(cfg.q)
    rows = []
    for theta in _float_list(cfg.theta):
        for tok in str(cfg.N).split(","):
            N = math.inf if tok.strip() == "inf" else int(float(tok))
            value = gronwall_factor(theta, q, N) if (N == math.inf or N > theta) else None
            rows.append({"theta": theta, "q": q, "N": "inf" if N == math.inf else N,
                         "factor": value, "tol": 1e-15})
    return {"tol": 1e-15, "rows": rows}


def cmd_suite(cfg):
    ids = None
    if cfg.criteria:
        ids = [int(x) for x in _float_list(cfg.criteria)]
        unknown = [i for i in ids if i not in acceptance.CRITERIA]
        if unknown:
            raise _violation(f"unknown criteria {unknown}", "criterion ids in 1..11")
    t0 = time.perf_counter()
    report = acceptance.run_suite(cfg.seed, quick=bool(cfg.quick), ids=ids, workers=int(cfg.workers))
    for c in report["criteria"]:
        tag = "PASS" if c["passed"] else "FAIL"
        print(f"[{tag}] criterion {c['id']}: {c['title']}", file=sys.stderr)
    print(f"suite finished in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return report


HANDLERS = {
    "rho-star": cmd_rho_star, "membership": cmd_membership, "sharpness": cmd_sharpness,
    "chi": cmd_chi, "envelope": cmd_envelope, "abp": cmd_abp, "gronwall": cmd_gronwall,
    "suite": cmd_suite,
}


# -- emission ------------------------------------------------------------------------


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def render_json(payload: dict, timestamp: str | None) -> str:
    body = _plain(payload)
    body["timestamp"] = timestamp
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def render_csv(subcommand: str, payload: dict) -> str:
    if subcommand == "abp":
        return reports_to_csv(payload["reports"])
    body = _plain(payload)
    rows = body.get("rows")
    if rows is None:
        rows = [{k: v for k, v in body.items() if not isinstance(v, (dict, list))}]
    buf = io.StringIO()
    cols = list(rows[0]) if rows else []
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"# garding-{subcommand}-v1"])
    w.writerow(cols)
    for r in rows:
        w.writerow([r.get(c) for c in cols])
    return buf.getvalue()


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def dispatch(cfg: RunConfig, timestamp: str | None = None) -> int:
    payload = HANDLERS[cfg.subcommand](cfg)
    if cfg.format == "csv":
        text = render_csv(cfg.subcommand, payload)
    else:
        text = render_json(payload, timestamp)
    _emit(text, cfg.output)
    return EXIT_OK


def main(argv=None) -> int:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    try:
        cfg = load_config(argv)
        return dispatch(cfg, stamp)
    except CliError as err:
        sys.stderr.write(json.dumps(_plain(err.payload), sort_keys=True) + "\n")
        return err.code


if __name__ == "__main__":
    sys.exit(main())

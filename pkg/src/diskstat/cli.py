"""Command-line front end: ``diskstat {mgf,coeffs,converge,sample,moments}``.

Parameters come from flags, then an optional JSON ``--config`` file, then the
defaults below.  ``--print-config`` prints the effective configuration and
exits.  Exit status is 0 on success, 2 on invalid configuration and 3 when a
numerical routine fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .asymptotics import (QuadratureSpec, clt_covariance, closed_form_moments,
                          expansion_coeffs)
from .ensemble import (EnsembleParams, MergeConfig, covariance_exact, log_mgf_exact,
                       mean_exact, radii, variance_exact)
from .errors import DomainError, NumericalError
from .sampler import (empirical_correlation, empirical_cumulants, resolve_threads,
                      sample_counts, standardize)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULTS: Dict[str, Any] = {
    "b": 1.0,
    "alpha": 0.0,
    "n": 1000,
    "n_grid": [256, 1024, 4096, 16384],
    "regime": "bulk",
    "r": 0.6,
    "offsets": [-0.3, 0.4],
    "u": [0.2, -0.1],
    "rel_tol": 1e-12,
    "seed": 0,
    "replicas": 10000,
    "format": "csv",
    "out": None,
    "threads": None,
}

COLUMNS = {
    "mgf": ["n", "u", "log_mgf"],
    "coeffs": ["regime", "C1", "C2", "C3", "C4", "quad_error"],
    "converge": ["n", "exact", "asymptotic", "residual", "normalized_residual"],
    "sample": ["quantity", "l", "k", "empirical", "stderr", "exact", "asymptotic", "z"],
    "moments": ["quantity", "l", "k", "coef_n", "coef_sqrt_n", "coef_1", "coef_inv_sqrt_n"],
}

# Every JSON document has this shape; "rows" follow "columns" positionally.
JSON_SCHEMA = {
    "type": "object",
    "required": ["command", "version", "config", "columns", "rows", "summary"],
    "properties": {
        "command": {"enum": sorted(COLUMNS)},
        "version": {"type": "string"},
        "config": {"type": "object"},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {"type": "array", "items": {"type": "array"}},
        "summary": {"type": "object"},
    },
    "additionalProperties": False,
}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--b", type=float, help="potential exponent b > 0")
    common.add_argument("--alpha", type=float, help="point-charge exponent alpha > -1")
    common.add_argument("--n", type=int, help="number of points")
    common.add_argument("--n-grid", dest="n_grid", type=_int_list, help="comma-separated n values")
    common.add_argument("--regime", choices=["bulk", "edge"])
    common.add_argument("--r", type=float, help="bulk base radius")
    common.add_argument("--offsets", type=_float_list, help="merging offsets s_1<...<s_m")
    common.add_argument("--u", type=_float_list, help="fugacities u_1,...,u_m")
    common.add_argument("--rel-tol", dest="rel_tol", type=float, help="quadrature relative tolerance")
    common.add_argument("--seed", type=int)
    common.add_argument("--replicas", type=int)
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--threads", type=int, help="worker cap (fallback: DISKSTAT_THREADS)")
    common.add_argument("--config", dest="config_file", help="JSON file with parameter values")
    common.add_argument("--print-config", dest="print_config", action="store_true",
                        help="print the effective configuration and exit")

    parser = argparse.ArgumentParser(prog="diskstat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"diskstat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("mgf", parents=[common], help="exact log-MGF over an n grid")
    sub.add_parser("coeffs", parents=[common], help="expansion coefficients C1..C4")
    sub.add_parser("converge", parents=[common], help="exact vs four-term expansion")
    sub.add_parser("sample", parents=[common], help="Monte Carlo vs exact and asymptotic moments")
    sub.add_parser("moments", parents=[common], help="closed-form mean/covariance coefficients")
    return parser


def resolve_config(ns: argparse.Namespace) -> Dict[str, Any]:
    """Merge flags over the config file over the defaults."""
    cfg = dict(DEFAULTS)
    path = getattr(ns, "config_file", None)
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config: top level must be a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        if hasattr(ns, key):
            cfg[key] = getattr(ns, key)
    return cfg


def _require(cond, field, msg):
    if not cond:
        raise ConfigError(f"{field}: {msg}")


def validate(cfg: Dict[str, Any], command: str) -> None:
    """Range-check every field before any computation."""
    def num(field):
        v = cfg[field]
        _require(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                 field, f"must be a finite number, got {v!r}")
        return float(v)

    b = num("b")
    _require(b > 0, "b", "must be > 0")
    _require(num("alpha") > -1, "alpha", "must be > -1")
    _require(cfg["regime"] in ("bulk", "edge"), "regime", "must be 'bulk' or 'edge'")
    offs = cfg["offsets"]
    _require(isinstance(offs, list) and len(offs) >= 1, "offsets", "need at least one offset")
    _require(all(isinstance(x, (int, float)) and math.isfinite(x) for x in offs), "offsets",
             "must be finite numbers")
    _require(all(x < y for x, y in zip(offs, offs[1:])), "offsets", "must be strictly increasing")
    if cfg["regime"] == "bulk":
        r = num("r")
        _require(0 < r < b ** (-1 / (2 * b)), "r", "bulk base radius must lie in (0, b^(-1/(2b)))")
    u = cfg["u"]
    _require(isinstance(u, list) and len(u) == len(offs), "u", "need one fugacity per offset")
    _require(all(isinstance(x, (int, float)) and math.isfinite(x) for x in u), "u",
             "must be finite numbers")
    n = cfg["n"]
    _require(isinstance(n, int) and n >= 1, "n", "must be a positive integer")
    grid = cfg["n_grid"]
    _require(isinstance(grid, list) and len(grid) >= 1 and all(isinstance(x, int) and x >= 1 for x in grid),
             "n_grid", "must be a list of positive integers")
    if command == "converge":
        _require(len(grid) >= 4, "n_grid", "converge needs at least 4 points")
        ratios = [y / x for x, y in zip(grid, grid[1:])]
        _require(ratios[0] > 1 and all(abs(q / ratios[0] - 1) < 1e-9 for q in ratios),
                 "n_grid", "converge needs an increasing geometric grid")
    rt = num("rel_tol")
    _require(1e-15 <= rt <= 1e-3, "rel_tol", "must lie in [1e-15, 1e-3]")
    seed = cfg["seed"]
    _require(isinstance(seed, int) and 0 <= seed < 2**64, "seed", "must be a 64-bit unsigned integer")
    rep = cfg["replicas"]
    _require(isinstance(rep, int) and rep >= 100, "replicas", "must be an integer >= 100")
    _require(cfg["format"] in ("csv", "json"), "format", "must be 'csv' or 'json'")
    th = cfg["threads"]
    _require(th is None or (isinstance(th, int) and th >= 1), "threads", "must be a positive integer")
    if th is None:
        try:
            resolve_threads(None)
        except DomainError as exc:
            raise ConfigError(f"threads: {exc}")


def _merge_config(cfg) -> MergeConfig:
    if cfg["regime"] == "bulk":
        return MergeConfig.bulk(cfg["r"], cfg["offsets"])
    return MergeConfig.edge(cfg["offsets"])


def _quad(cfg) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=cfg["rel_tol"])


def cmd_mgf(cfg) -> tuple:
    mc = _merge_config(cfg)
    rows = []
    for n in cfg["n_grid"]:
        p = EnsembleParams(cfg["b"], cfg["alpha"], n)
        rows.append([n, list(cfg["u"]), log_mgf_exact(p, radii(p, mc), cfg["u"])])
    return rows, {}


def cmd_coeffs(cfg) -> tuple:
    c = expansion_coeffs(cfg["b"], cfg["alpha"], _merge_config(cfg), cfg["u"], _quad(cfg))
    qerr = max(c.errors.values(), default=0.0)
    return [[c.regime, c.C1, c.C2, c.C3, c.C4, qerr]], {"integral_errors": dict(c.errors)}


def cmd_converge(cfg) -> tuple:
    mc = _merge_config(cfg)
    c = expansion_coeffs(cfg["b"], cfg["alpha"], mc, cfg["u"], _quad(cfg))
    rows = []
    for n in cfg["n_grid"]:
        p = EnsembleParams(cfg["b"], cfg["alpha"], n)
        ex = log_mgf_exact(p, radii(p, mc), cfg["u"])
        asy = c.evaluate(n)
        res = ex - asy
        rows.append([n, ex, asy, res, res * n / math.log(n) ** 2 if n > 1 else math.nan])
    ns = np.array([row[0] for row in rows], dtype=float)
    res = np.abs([row[3] for row in rows])
    if np.all(res > 0):
        slope = float(np.polyfit(np.log(ns), np.log(res), 1)[0])
    else:
        slope = None  # residual vanishes identically, e.g. at u = 0
    return rows, {"fitted_exponent": slope}


def cmd_sample(cfg) -> tuple:
    mc = _merge_config(cfg)
    b, al, n = cfg["b"], cfg["alpha"], cfg["n"]
    p = EnsembleParams(b, al, n)
    rad = radii(p, mc)
    batch = sample_counts(p, rad, cfg["replicas"], cfg["seed"], threads=cfg["threads"])
    cf = closed_form_moments(b, al, mc, _quad(cfg))
    mu_asy, cov_asy = cf.evaluate(n)
    m = mc.m
    rows = []

    def add(q, l, k, est, exact, asy):
        z = (est[0] - exact) / est[1] if est[1] > 0 else math.nan
        rows.append([q, l, k, est[0], est[1], exact, asy, z])

    for l in range(m):
        jv = [0] * m
        jv[l] = 1
        add("mean", l, l, empirical_cumulants(batch, jv), mean_exact(p, rad[l]), mu_asy[l])
    for l in range(m):
        jv = [0] * m
        jv[l] = 2
        add("variance", l, l, empirical_cumulants(batch, jv), variance_exact(p, rad[l]), cov_asy[l, l])
    sigma = clt_covariance(b, al, mc, _quad(cfg)) if m > 1 else np.eye(1)
    z = standardize(batch, mc, mc.regime)
    for l in range(m):
        for k in range(l + 1, m):
            jv = [0] * m
            jv[l] = jv[k] = 1
            add("covariance", l, k, empirical_cumulants(batch, jv),
                covariance_exact(p, rad[l], rad[k]), cov_asy[l, k])
            exact_corr = covariance_exact(p, rad[l], rad[k]) / math.sqrt(
                variance_exact(p, rad[l]) * variance_exact(p, rad[k]))
            add("std_correlation", l, k, empirical_correlation(z, l, k), exact_corr, sigma[l, k])
    return rows, {"replicas": cfg["replicas"], "seed": cfg["seed"]}


def cmd_moments(cfg) -> tuple:
    mc = _merge_config(cfg)
    cf = closed_form_moments(cfg["b"], cfg["alpha"], mc, _quad(cfg))
    rows = []
    for l in range(mc.m):
        rows.append(["mean", l, l, *cf.mean[l]])
    for l in range(mc.m):
        for k in range(l, mc.m):
            rows.append(["variance" if l == k else "covariance", l, k, *cf.cov[l, k]])
    return rows, {}


COMMANDS = {"mgf": cmd_mgf, "coeffs": cmd_coeffs, "converge": cmd_converge,
            "sample": cmd_sample, "moments": cmd_moments}


def _csv_cell(v):
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, list):
        return ";".join(_csv_cell(float(x)) for x in v)
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # non-finite values become null so the document stays valid JSON
        return float(format(v, ".17g")) if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render(command: str, cfg: Dict[str, Any], rows, summary) -> str:
    cols = COLUMNS[command]
    if cfg["format"] == "json":
        doc = {
            "command": command,
            "version": __version__,
            "config": _json_value(cfg),
            "columns": cols,
            "rows": [_json_value(r) for r in rows],
            "summary": _json_value(summary),
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(v) for v in r])
    for k, v in summary.items():
        if not isinstance(v, dict):
            buf.write(f"# {k}={_csv_cell(v) if v is not None else 'nan'}\n")
    return buf.getvalue()


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        validate(cfg, ns.command)
    except ConfigError as exc:
        print(f"diskstat: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(ns, "print_config", False):
        print(json.dumps(_json_value(cfg), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        rows, summary = COMMANDS[ns.command](cfg)
    except DomainError as exc:
        print(f"diskstat: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"diskstat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(ns.command, cfg, rows, summary)
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

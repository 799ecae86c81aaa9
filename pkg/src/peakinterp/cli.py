"""Command line front end.

Usage::

    peakinterp check    --config run.json --out results/
    peakinterp stratify --config run.json --out results/
    peakinterp peak     --config run.json --out results/ --threads 4
    peakinterp catalog  --out results/

Exit codes: 0 success, 1 audit or property violation, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import artifacts, catalog
from .domain import DomainModel, convexity_audit
from .patch import Grid, nondegeneracy_map, patch_audit, subpatch
from .peak import (BumpFunction, PeakFamily, estimate_constants, limit_audit, normalization,
                   sample_closure_points)
from .strata import refine_transitions, stratify

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "seed": 0,
    "grid": None,
    "subpatch": None,
    "tolerances": {
        "tangency": 1e-9,
        "boundary_factor": 1.0,
        "convexity": 1e-9,
        "rank": None,
        "nondegeneracy": 1e-6,
        "quadrature_abs": 1e-8,
    },
    "samples": {"convexity": 1000, "pairs": 4000, "closure": 50},
    "refine_levels": 0,
    "deltas": [0.2, 0.1, 0.05, 0.02],
    "bump": {"kind": "smooth-exponential", "radius": None},
    "z_on": None,
    "z_off": None,
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(out.get(k), dict) and isinstance(v, dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def resolve_config(raw: dict, seed: int | None = None) -> dict:
    """Fill defaults and validate; returns the config recorded in every artifact."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(DEFAULTS) - {"domain", "patch"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "patch" not in raw:
        raise ConfigError("config needs a 'patch' entry")
    cfg = _merge(DEFAULTS, raw)
    if seed is not None:
        cfg["seed"] = int(seed)
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    p = cfg["patch"]
    if not isinstance(p, dict) or "catalog" not in p:
        raise ConfigError("patch must be {'catalog': name, 'params': {...}}")
    p.setdefault("params", {})
    if "domain" not in cfg:
        if p["catalog"] not in catalog.HOME_DOMAIN:
            raise ConfigError(f"unknown catalog patch {p['catalog']!r}")
        name, params = catalog.HOME_DOMAIN[p["catalog"]]
        cfg["domain"] = {"catalog": name, "params": dict(params)}
    d = cfg["domain"]
    if not isinstance(d, dict):
        raise ConfigError("domain must be an object")
    if "catalog" in d:
        d.setdefault("params", {})
    elif "monomials" not in d:
        raise ConfigError("domain needs 'catalog' or inline 'monomials'")
    if not all(isinstance(v, (int, float)) and v > 0 for v in cfg["deltas"]):
        raise ConfigError("deltas must be positive numbers")
    if cfg["z_on"] is not None and np.asarray(cfg["z_on"], dtype=float).ndim != 2:
        raise ConfigError("z_on must be a list of parameter points")
    cfg["deltas"] = sorted((float(v) for v in cfg["deltas"]), reverse=True)
    return cfg


def build_inputs(cfg: dict):
    """Domain, patch and grid described by a resolved config."""
    try:
        d = cfg["domain"]
        if "catalog" in d:
            domain = catalog.make_domain(d["catalog"], **d["params"])
        else:
            domain = DomainModel.from_dict(d)
        p = cfg["patch"]
        patch = catalog.make_patch(p["catalog"], **p["params"])
        if cfg["subpatch"]:
            sp = cfg["subpatch"]
            patch = subpatch(patch, sp["center"], sp["radius"], sp.get("scale", 1.0))
        if patch.ambient_n != domain.ambient_n:
            raise ConfigError("patch and domain live in different dimensions")
        if cfg["grid"]:
            grid = Grid.from_dict(cfg["grid"])
        else:
            half = 0.95 * patch.radius_R / np.sqrt(patch.dim_d)
            steps = 200 if patch.dim_d == 1 else 32 if patch.dim_d == 2 else 12
            grid = Grid([-half] * patch.dim_d, [half] * patch.dim_d, [steps] * patch.dim_d)
        if grid.dim != patch.dim_d:
            raise ConfigError("grid dimension differs from the patch dimension")
        if cfg["z_off"] is not None:
            _complex_points(cfg["z_off"], domain.ambient_n)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return domain, patch, grid


def _header(cfg: dict) -> dict:
    return {"config_sha256": artifacts.config_hash(cfg), "seed": cfg["seed"],
            "tolerances": cfg["tolerances"]}


def _complex_points(points, n):
    """Points given as ``[[[re, im], ...n pairs], ...]``."""
    a = np.asarray(points, dtype=float)
    if a.ndim != 3 or a.shape[1:] != (n, 2):
        raise ConfigError(f"complex points must be lists of {n} [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def cmd_check(cfg: dict, out: Path, threads: int = 1) -> int:
    domain, patch, grid = build_inputs(cfg)
    tol = cfg["tolerances"]
    conv = convexity_audit(domain, cfg["samples"]["convexity"], cfg["seed"], tol=tol["convexity"])
    pa = patch_audit(patch, domain, grid, tol["boundary_factor"], tol["tangency"])
    failures = []
    if not conv["passed"]:
        failures.append("convexity")
    for key in ("boundary_ok", "immersion_ok", "tangency_ok"):
        if not pa[key]:
            failures.append(key[:-3])
    report = {**_header(cfg), "config": cfg, "convexity_audit": conv, "patch_audit": pa,
              "failures": failures, "passed": not failures}
    artifacts.write_json(out / "check.json", report)
    if "tangency" in failures:
        print(f"tangency residual {pa['max_tangency_residual']:.6g} at x = "
              f"{pa['max_tangency_residual_at']}", file=sys.stderr)
    print("check: " + ("passed" if not failures else "failed (" + ", ".join(failures) + ")"))
    return EXIT_OK if not failures else EXIT_VIOLATION


def cmd_stratify(cfg: dict, out: Path, threads: int = 1) -> int:
    domain, patch, grid = build_inputs(cfg)
    tol = cfg["tolerances"]
    pa = patch_audit(patch, domain, grid, tol["boundary_factor"], tol["tangency"])
    if not pa["passed"]:
        artifacts.write_json(out / "stratify.json", {**_header(cfg), "config": cfg, "patch_audit": pa,
                                                     "passed": False})
        print("stratify: patch audit failed")
        return EXIT_VIOLATION
    rep = stratify(patch, domain, grid, tol["rank"])
    if cfg["refine_levels"]:
        rep = refine_transitions(rep, int(cfg["refine_levels"]), patch, domain)
    head = _header(cfg)
    artifacts.write_json(out / "stratify.json", {**head, "config": cfg, **rep.to_dict()})
    d = grid.dim
    rows = [list(c) + [int(lab), float(ev)] for c, lab, ev in zip(rep.centers, rep.labels, rep.min_eig)]
    artifacts.write_csv(out / "stratify.csv", [f"c{k}" for k in range(d)] + ["label", "min_eigenvalue"],
                        rows, head)
    print("stratify: " + json.dumps(rep.component_counts(), sort_keys=True))
    return EXIT_OK


def cmd_peak(cfg: dict, out: Path, threads: int = 1) -> int:
    domain, patch, grid = build_inputs(cfg)
    tol = cfg["tolerances"]
    head = _header(cfg)
    pa = patch_audit(patch, domain, grid, tol["boundary_factor"], tol["tangency"])
    nd = nondegeneracy_map(patch, domain, grid, tol["nondegeneracy"])
    if not pa["passed"] or not nd["all_nondegenerate"]:
        bad = nd["points"][~nd["nondegenerate"]]
        k = int(np.argmin(nd["min_eigenvalue"]))
        report = {**head, "config": cfg, "patch_audit": pa,
                  "nondegenerate": nd["all_nondegenerate"],
                  "degenerate_points": bad, "min_eigenvalue": float(nd["min_eigenvalue"][k]),
                  "min_eigenvalue_at": nd["points"][k], "passed": False}
        artifacts.write_json(out / "peak_precheck.json", report)
        where = np.round(nd["points"][k], 12).tolist()
        print(f"peak: patch is degenerate; lambda_min(H) = {nd['min_eigenvalue'][k]:.3g} at x = {where}")
        return EXIT_VIOLATION
    constants = estimate_constants(patch, domain, cfg["seed"], cfg["samples"]["pairs"])
    b = cfg["bump"]
    bump = BumpFunction(b["radius"] or constants.varrho, b["kind"])
    family = PeakFamily(patch, domain, constants, bump, abs_tol=tol["quadrature_abs"])
    d, n = patch.dim_d, patch.ambient_n
    G0 = normalization(patch, domain, np.zeros(d))
    cache = {k: family.cache[k] for k in ("min", "max", "sup_f_over_G", "quadrature_check_max_rel")}
    artifacts.write_json(out / "constants.json", {
        **head, "config": cfg, "constants": constants.to_dict(), "bump": bump.to_dict(),
        "G_at_origin": G0, "G_cache": {"nodes": int(len(family.cache["nodes"])), **cache},
    })
    z_on = np.zeros((1, d)) if cfg["z_on"] is None else np.asarray(cfg["z_on"], dtype=float).reshape(-1, d)
    if cfg["z_off"] is None:
        w = domain.interior_witness
        z_off = (w[0::2] + 1j * w[1::2])[None]
    else:
        z_off = _complex_points(cfg["z_off"], n)
    z_extra = sample_closure_points(family, cfg["samples"]["closure"], cfg["seed"])
    audit = limit_audit(family, cfg["deltas"], z_on, z_off, z_extra, threads=threads)
    cols = ["delta", "z_id", "re_h", "im_h", "abs_h", "bound", "err_vs_target"]
    for kind, name in (("on", "limit_audit_on.csv"), ("off", "limit_audit_off.csv"),
                       ("extra", "limit_audit_sup.csv")):
        rows = [[r["delta"], r["z_id"], r["re"], r["im"], r["abs"], r["bound"], r["err_vs_target"]]
                for r in audit["rows"] if r["kind"] == kind]
        artifacts.write_csv(out / name, cols, rows, head)
    checks = audit["checks"]
    artifacts.write_json(out / "limit_audit.json", {**head, "checks": checks})
    print(f"peak: G(0) = {G0:.6f}; sup|h| = {checks['claim_i_sup']:.4f} <= {checks['claim_i_bound']:.4f}; "
          + ("passed" if checks["passed"] else "failed"))
    return EXIT_OK if checks["passed"] else EXIT_VIOLATION


def cmd_catalog(out: Path | None) -> int:
    entries = catalog.list_entries()
    if out is not None:
        artifacts.write_json(out / "catalog.json", {"entries": entries})
        for e in entries:
            if e["kind"] == "domain":
                artifacts.write_json(out / "domains" / f"{e['name']}.json",
                                     catalog.make_domain(e["name"], **e["params"]).to_dict())
    for e in entries:
        print(f"{e['kind']:7s} {e['name']:22s} {json.dumps(e['params'])}  {e['notes']}")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "stratify": cmd_stratify, "peak": cmd_peak}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="peakinterp", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("check", "stratify", "peak", "catalog"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=name != "catalog")
        sp.add_argument("--out", type=Path, default=None if name == "catalog" else Path("results"))
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "catalog":
        return cmd_catalog(args.out)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        raw = json.loads(args.config.read_text())
        cfg = resolve_config(raw, args.seed)
        build_inputs(cfg)
    except (OSError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())

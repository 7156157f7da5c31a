"""Command-line front end.

Every command writes deterministic artifacts into ``--out-dir``: CSV tables
(RFC 4180) and a JSON report, each with a provenance header carrying the
geometry hash, material parameters and package version.  Settings come
from an optional JSON config file; command-line flags override it.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .geometry import (CURVE_KINDS, SURFACE_KINDS, geometry_hash, make_curve,
                       make_parametric_surface)
from .operators import NumericalError, constant_field, sample_field
from .params_kernels import derive_constants

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("spectrum", "kdiv-spectrum", "decompose", "sphere-exact", "verify", "bvp", "dilate2d")
MAX_N, MAX_NPOLAR = 2048, 24
FIELDS = ("random", "constant", "gradient", "rotation")

DEFAULTS = {
    "geometry": {"kind": "sphere", "params": None, "N": 256, "n_polar": 16},
    "material": {"lambda": 1.0, "mu": 1.0},
    "tolerances": {"enp_cluster": 0.05, "kdiv_cluster": 0.02},
    "output": {"dir": "elasticnp_out"},
    "seed": 0,
    "field": "random",
    "kmax": 6,
    "suite": "identities",
    "radii": [4.0, 16.0, 64.0],
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field, msg):
        super().__init__(f"{field}: {msg}")
        self.field = field


# ---------------------------------------------------------------------------
# configuration


def _merge(base, over):
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="elasticnp", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; flags override its entries")
    p.add_argument("--geometry", help="curve: " + ", ".join(CURVE_KINDS)
                   + "; surface: " + ", ".join(SURFACE_KINDS))
    p.add_argument("--shape-params", help="comma-separated shape parameters")
    p.add_argument("--N", type=int, help=f"curve nodes (even, <= {MAX_N})")
    p.add_argument("--n-polar", type=int, help=f"surface latitude count (<= {MAX_NPOLAR})")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--tol", type=float, help="cluster tolerance")
    p.add_argument("--field", choices=FIELDS, help="test field for decompose / bvp")
    p.add_argument("--seed", type=int)
    p.add_argument("--kmax", type=int, help="sphere-exact: largest degree")
    p.add_argument("--suite", choices=("identities",))
    p.add_argument("--radii", help="dilate2d: comma-separated dilation factors")
    p.add_argument("--out-dir")
    return p


def load_config(args):
    cfg = DEFAULTS
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = _merge(cfg, json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
    over = {"geometry": {}, "material": {}, "tolerances": {}, "output": {}}
    if args.geometry is not None:
        over["geometry"]["kind"] = args.geometry
        if args.shape_params is None:
            over["geometry"]["params"] = None
    if args.shape_params is not None:
        try:
            over["geometry"]["params"] = [float(s) for s in args.shape_params.split(",") if s]
        except ValueError as exc:
            raise ConfigError("geometry.params", "expected comma-separated numbers") from exc
    if args.N is not None:
        over["geometry"]["N"] = args.N
    if args.n_polar is not None:
        over["geometry"]["n_polar"] = args.n_polar
    if args.lam is not None:
        over["material"]["lambda"] = args.lam
    if args.mu is not None:
        over["material"]["mu"] = args.mu
    if args.tol is not None:
        key = "kdiv_cluster" if args.command == "kdiv-spectrum" else "enp_cluster"
        over["tolerances"][key] = args.tol
    if args.out_dir is not None:
        over["output"]["dir"] = args.out_dir
    for name in ("field", "seed", "kmax", "suite"):
        if getattr(args, name) is not None:
            over[name] = getattr(args, name)
    if args.radii is not None:
        try:
            over["radii"] = [float(s) for s in args.radii.split(",") if s]
        except ValueError as exc:
            raise ConfigError("radii", "expected comma-separated numbers") from exc
    cfg = _merge(cfg, over)
    cfg["command"] = args.command
    validate(cfg)
    return cfg


def validate(cfg):
    g = cfg["geometry"]
    kind = g.get("kind")
    if kind not in CURVE_KINDS + SURFACE_KINDS:
        raise ConfigError("geometry.kind", f"unknown kind {kind!r}")
    if kind in CURVE_KINDS:
        N = g.get("N")
        if not isinstance(N, int) or N < 8 or N > MAX_N or N % 2:
            raise ConfigError("geometry.N", f"must be an even integer in [8, {MAX_N}], got {N!r}")
    else:
        n = g.get("n_polar")
        if not isinstance(n, int) or n < 4 or n > MAX_NPOLAR:
            raise ConfigError("geometry.n_polar", f"must be an integer in [4, {MAX_NPOLAR}], got {n!r}")
    m = 2 if kind in CURVE_KINDS else 3
    try:
        derive_constants(cfg["material"]["lambda"], cfg["material"]["mu"], m)
    except (ValueError, TypeError) as exc:
        raise ConfigError("material", str(exc)) from exc
    for k, v in cfg["tolerances"].items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"tolerances.{k}", "must be positive")
    if cfg["field"] not in FIELDS:
        raise ConfigError("field", f"must be one of {FIELDS}")
    if not isinstance(cfg["kmax"], int) or not 0 <= cfg["kmax"] <= 12:
        raise ConfigError("kmax", "must be an integer in [0, 12]")
    if cfg["command"] == "dilate2d":
        if m != 2:
            raise ConfigError("geometry.kind", "dilate2d needs a curve")
        if not cfg["radii"] or any(not r > 0 for r in cfg["radii"]):
            raise ConfigError("radii", "must be positive")


def make_geometry(cfg):
    g = cfg["geometry"]
    params = tuple(g["params"]) if g.get("params") else None
    try:
        if g["kind"] in CURVE_KINDS:
            return make_curve(g["kind"], params, N=g["N"])
        return make_parametric_surface(g["kind"], params, n_polar=g["n_polar"])
    except (ValueError, TypeError) as exc:
        raise ConfigError("geometry.params", str(exc)) from exc


def material(cfg, geom):
    return derive_constants(cfg["material"]["lambda"], cfg["material"]["mu"], geom.m)


# ---------------------------------------------------------------------------
# artifacts


def provenance(cfg, geom=None, params=None):
    d = {"code_version": __version__, "command": cfg["command"]}
    if geom is not None:
        d["geometry_hash"] = geometry_hash(geom)
        d["geometry"] = f"{geom.kind} {list(geom.shape_params)} resolution={geom.resolution}"
    if params is not None:
        d["params"] = json.dumps({k: round(v, 15) if isinstance(v, float) else v
                                  for k, v in params.as_dict().items()}, sort_keys=True)
    return d


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.12e}")
    return x


def write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def table_csv(header, columns, rows):
    buf = io.StringIO()
    for k in sorted(header):
        buf.write(f"# {k}: {header[k]}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# test fields


def make_field(geom, name, seed):
    m = geom.m
    if name == "constant":
        return constant_field(geom, np.linspace(1.0, -0.5, m))
    if name == "gradient":
        if m == 2:
            return sample_field(geom, lambda x: np.c_[2 * x[:, 0], -2 * x[:, 1]])
        return sample_field(geom, lambda x: np.c_[x[:, 1], x[:, 0], 0 * x[:, 0]])
    if name == "rotation":
        if m == 2:
            return sample_field(geom, lambda x: np.c_[-x[:, 1], x[:, 0]])
        return sample_field(geom, lambda x: np.c_[-x[:, 1], x[:, 0], 0 * x[:, 0]])
    rng = np.random.default_rng(seed)
    if m == 2:
        # smooth random field: Fourier modes up to 8 with decaying amplitudes
        t = geom.t
        k = np.arange(1, 9)
        a = rng.standard_normal((2, 2, 8)) / k**2
        v = np.stack([np.cos(np.outer(t, k)) @ a[c, 0] + np.sin(np.outer(t, k)) @ a[c, 1]
                      for c in range(2)], 1) + rng.standard_normal(2)
        from .operators import BoundaryField
        return BoundaryField(geom, v.reshape(-1))
    # random polynomial field of degree <= 3 in the coordinates
    expo = [(a, b, c) for a in range(4) for b in range(4) for c in range(4) if a + b + c <= 3]
    coef = rng.standard_normal((len(expo), 3)) / (1 + np.array([sum(e) for e in expo]))[:, None]

    def fn(x):
        mon = np.stack([x[:, 0]**a * x[:, 1]**b * x[:, 2]**c for a, b, c in expo], 1)
        return mon @ coef
    return sample_field(geom, fn)


# ---------------------------------------------------------------------------
# commands


def _sphere_nearest(geom, params, eigs, which):
    if geom.kind != "sphere" or tuple(geom.shape_params) != (1.0,):
        return None
    from .sphere_analytic import sphere_exact_table
    lam = Fraction(params.lam).limit_denominator(10**6)
    mu = Fraction(params.mu).limit_denominator(10**6)
    kmax = geom.n_polar
    tab = sphere_exact_table(kmax, lam, mu, "enp" if which == "K" else "kdiv")
    vals = np.array(sorted({float(r["value"]) for r in tab}))
    return vals[np.abs(eigs[:, None] - vals[None]).argmin(1)]


def _spectrum_command(cfg, which):
    from .spectra import (cluster_eigenvalues, enp_spectrum, enp_targets, kdiv_spectrum,
                          kdiv_targets, spectrum_csv)
    geom = make_geometry(cfg)
    params = material(cfg, geom)
    if which == "K":
        spec = enp_spectrum(geom, params)
        targets, tol = enp_targets(params.k0), cfg["tolerances"]["enp_cluster"]
    else:
        spec = kdiv_spectrum(geom, params)
        targets = dict(kdiv_targets(), middle=None)
        tol = cfg["tolerances"]["kdiv_cluster"]
    rep = cluster_eigenvalues(spec.eigenvalues, targets, tol)
    near = _sphere_nearest(geom, params, spec.eigenvalues, which)
    head = provenance(cfg, geom, params)
    head["dilation"] = spec.dilation
    out = cfg["output"]["dir"]
    stem = "spectrum" if which == "K" else "kdiv_spectrum"
    write_text(os.path.join(out, stem + ".csv"), spectrum_csv(spec, rep, near, head))
    summary = {"provenance": head, "n_eigenvalues": len(spec.eigenvalues),
               "clusters": rep.as_dict(), "max_residual": float(spec.residuals.max()),
               "symmetrization_defect": spec.sym_defect,
               "range": [float(spec.eigenvalues[0]), float(spec.eigenvalues[-1])]}
    if near is not None:
        summary["max_distance_to_exact"] = float(np.abs(spec.eigenvalues - near).max())
    write_json(os.path.join(out, stem + "_summary.json"), summary)
    return EXIT_OK, summary


def cmd_spectrum(cfg):
    return _spectrum_command(cfg, "K")


def cmd_kdiv_spectrum(cfg):
    return _spectrum_command(cfg, "Kdiv")


def cmd_decompose(cfg):
    from .spectra import decompose_field, kdiv_spectrum
    geom = make_geometry(cfg)
    params = material(cfg, geom)
    f = make_field(geom, cfg["field"], cfg["seed"])
    spec = kdiv_spectrum(geom, params)
    vals = f.values
    if spec.dilation != 1.0:
        # fields are dilation-independent samples; decompose on the dilated copy
        from .operators import BoundaryField
        f = BoundaryField(spec.geometry, vals)
    parts = decompose_field(f, spec, cfg["tolerances"]["kdiv_cluster"])
    head = provenance(cfg, geom, params)
    head["field"] = cfg["field"]
    head["seed"] = cfg["seed"]
    m = geom.m
    cols = ["node"] + [f"{p}_{c}" for p in ("f", "f_minus", "f_plus", "f_mid") for c in range(m)]
    arrs = [vals.reshape(-1, m)] + [parts[k].reshape(-1, m) for k in ("f_minus", "f_plus", "f_mid")]
    stack = np.hstack(arrs)
    rows = [[i] + [f"{v:.12e}" for v in r] for i, r in enumerate(stack)]
    out = cfg["output"]["dir"]
    write_text(os.path.join(out, "decomposition.csv"), table_csv(head, cols, rows))
    summary = {"provenance": head, "norms": parts["norms"]}
    write_json(os.path.join(out, "decomposition_summary.json"), summary)
    return EXIT_OK, summary


def cmd_sphere_exact(cfg):
    from .sphere_analytic import sphere_enp_eigenvalues, verify_Pk_decomposition
    kmax = cfg["kmax"]
    lam = Fraction(cfg["material"]["lambda"]).limit_denominator(10**6)
    mu = Fraction(cfg["material"]["mu"]).limit_denominator(10**6)
    dims, xi = [], []
    ok = True
    for k in range(kmax + 1):
        r = verify_Pk_decomposition(k, mu)
        ok &= bool(r["dims_ok"] and r["direct_sum_ok"])
        dims.append({"k": k, "dims": list(r["dims"]), "rank_total": r["rank_total"],
                     "target_dim": r["target_dim"], "dims_ok": r["dims_ok"],
                     "direct_sum_ok": r["direct_sum_ok"],
                     "orthogonality_ok": r.get("orthogonality_ok")})
        if k >= 1:
            xo, xm, xp = sphere_enp_eigenvalues(k, lam, mu)
            xi.append({"k": k, "xi_o": xo, "xi_minus": xm, "xi_plus": xp})
    summary = {"provenance": provenance(cfg), "lambda": lam, "mu": mu, "kmax": kmax,
               "decomposition": dims, "eigenvalues": xi, "all_ok": ok}
    write_json(os.path.join(cfg["output"]["dir"], "sphere_exact.json"), summary)
    return (EXIT_OK if ok else EXIT_VERIFY), summary


def cmd_verify(cfg):
    from .operators import constant_action_residuals, symmetrization_residual
    from .potentials_bvp import jump_check
    geom = make_geometry(cfg)
    params = material(cfg, geom)
    planar = geom.m == 2
    tol_id = 1e-8 if planar else 1e-4
    tol_pl = 1e-8 if planar else 1e-3
    tol_jump = 1e-3 if planar else 5e-3
    rows = []

    def add(name, value, tol):
        rows.append({"check": name, "value": float(value), "tol": tol,
                     "pass": bool(value <= tol)})

    add("plemelj_symmetrization", symmetrization_residual(geom, params), tol_pl)
    for k, v in constant_action_residuals(geom, params).items():
        add(f"constant_action_{k}", v, tol_id)
    f = make_field(geom, "random", cfg["seed"])
    j = jump_check(geom, f)
    add("jump_divfree_double_layer", j["jump_residual"], tol_jump)
    add("trace_inner", j["inner_residual"], tol_jump)
    add("trace_outer", j["outer_residual"], tol_jump)
    if planar:
        from .planar import involution_residual, kdiv_cauchy_residual
        add("kdiv_cauchy_equivalence", kdiv_cauchy_residual(geom), 1e-8)
        add("kdiv_involution", involution_residual(geom), 1e-8)
    head = provenance(cfg, geom, params)
    text = table_csv(head, ["check", "value", "tol", "pass"],
                     [[r["check"], f"{r['value']:.3e}", f"{r['tol']:.0e}",
                       "PASS" if r["pass"] else "FAIL"] for r in rows])
    write_text(os.path.join(cfg["output"]["dir"], "verify.csv"), text)
    ok = all(r["pass"] for r in rows)
    summary = {"provenance": head, "checks": rows, "all_pass": ok}
    write_json(os.path.join(cfg["output"]["dir"], "verify.json"), summary)
    return (EXIT_OK if ok else EXIT_VERIFY), summary


def cmd_bvp(cfg):
    from .potentials_bvp import boundary_energies, membership, solve_lame_dirichlet
    geom = make_geometry(cfg)
    params = material(cfg, geom)
    f = make_field(geom, cfg["field"], cfg["seed"])
    en = boundary_energies(geom, params, f)
    ev = solve_lame_dirichlet(geom, params, f)
    summary = {"provenance": provenance(cfg, geom, params), "field": cfg["field"],
               "energies": en, "energy_sum_defect": en["E_int"] + en["E_ext"] - en["norm2"]}
    if geom.kind != "torus":
        probe = np.array([[0.25] * geom.m, [0.0] * geom.m])
        val, div, rot = ev.evaluate(probe, derivatives=True)
        summary["probe"] = {"points": probe.tolist(), "u": val.tolist(), "div": div.tolist(),
                            "rot": np.atleast_1d(rot).tolist()}
        summary["membership"] = membership(geom, f)
    write_json(os.path.join(cfg["output"]["dir"], "bvp.json"), summary)
    return EXIT_OK, summary


def cmd_dilate2d(cfg):
    from .planar import dilation_positivity
    geom = make_geometry(cfg)
    params = material(cfg, geom)
    rows = [dilation_positivity(geom, r, params) for r in cfg["radii"]]
    head = provenance(cfg, geom, params)
    text = table_csv(head, ["r", "spd", "min_eig", "mean_mode_min_eig"],
                     [[f"{r['r']:g}", str(r["spd"]).lower(), f"{r['min_eig']:.12e}",
                       f"{r['mean_mode_min_eig']:.12e}"] for r in rows])
    write_text(os.path.join(cfg["output"]["dir"], "dilation.csv"), text)
    summary = {"provenance": head, "rows": rows}
    write_json(os.path.join(cfg["output"]["dir"], "dilation.json"), summary)
    return EXIT_OK, summary


HANDLERS = {"spectrum": cmd_spectrum, "kdiv-spectrum": cmd_kdiv_spectrum,
            "decompose": cmd_decompose, "sphere-exact": cmd_sphere_exact,
            "verify": cmd_verify, "bvp": cmd_bvp, "dilate2d": cmd_dilate2d}


def run(cfg):
    """Execute a validated config; returns (exit code, summary dict)."""
    os.makedirs(cfg["output"]["dir"], exist_ok=True)
    return HANDLERS[cfg["command"]](cfg)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        code, summary = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    status = {EXIT_OK: "ok", EXIT_VERIFY: "verification failed"}[code]
    print(f"{cfg['command']}: {status} -> {cfg['output']['dir']}")
    return code


if __name__ == "__main__":
    sys.exit(main())

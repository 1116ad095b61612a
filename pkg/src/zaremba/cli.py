"""Config-driven experiment runner.

Every capability of the library is exposed as a subcommand taking one TOML
config file:

    zaremba ap config.toml            Muckenhoupt constant estimate
    zaremba capacity config.toml      one condenser capacity + potential
    zaremba scaling config.toml       capacity scaling sweep and slope fit
    zaremba poincare config.toml      Poincare constant for (K, mu)
    zaremba comparability config.toml C*r*(Cap/mu)^(1/q) over dyadic scales
    zaremba cen config.toml           capacity-density check on a set D
    zaremba cantor config.toml        Cantor interval dump
    zaremba solve config.toml         one mixed-boundary solve
    zaremba meyers config.toml        higher-integrability refinement table
    zaremba local config.toml         Caccioppoli / reverse-Holder samples
    zaremba validate config.toml      constraint check only, no computation

Outputs are CSV files with a versioned header ("# schema_version=...",
"# config_hash=...") plus one summary JSON per run.  Identical config and
seed reproduce the CSV bytes exactly: float cells are written with repr
(shortest round-trip), iteration orders are fixed, and nothing time- or
host-dependent enters a CSV (wall time lives only in the JSON summary).

Exit codes: 0 success, 2 config error, 3 numerical failure.  The output
directory comes from the config (``output_dir``), overridden by the
ZAREMBA_OUTDIR environment variable, overridden by ``--outdir``.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np
import tomli

from . import geometry
from .assembly import DiscreteField, VectorField, gradient_at_quadpoints
from .capacity import (CapacityProblem, capacity_scaling_check,
                       classify_negligible, compute_capacity)
from .errors import ConfigError, ZarembaError
from .geometry import Box, Grid, NodeSet, cantor_intervals, interior_set, mark_dirichlet
from .meyers import caccioppoli_check, meyers_scan, reverse_holder_check, sample_cubes
from .poincare import (comparability_ratio, line_intervals, poincare_constant,
                       verify_cen)
from .solver import ZarembaProblem, energy_ratio, solve_zaremba
from .weights import MatrixWeight, ScalarWeight, ap_constant_estimate

SCHEMA_VERSION = 1

SUBCOMMANDS = ("ap", "capacity", "scaling", "poincare", "comparability",
               "cen", "cantor", "solve", "meyers", "local")


# --- config loading and validation ------------------------------------------

_EXPR_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "abs": np.abs, "hypot": np.hypot,
    "pi": np.pi, "e": np.e, "minimum": np.minimum, "maximum": np.maximum,
}

_WEIGHT_KEYS = {"kind", "c", "center", "exponent", "factors",
                "kappa", "theta", "lambda_bound", "form"}
_BOUNDARY_KEYS = {"kind", "edges", "period", "lam", "level", "edge", "nodes"}

_SCHEMA = {
    "common": {"seed", "output_dir", "subcommand"},
    "ap": {"weight", "domain", "ap", "exponents"},
    "capacity": {"weight", "domain", "capacity", "exponents", "solver"},
    "scaling": {"weight", "scaling", "exponents", "solver"},
    "poincare": {"weight", "domain", "poincare", "exponents", "solver"},
    "comparability": {"weight", "comparability", "exponents", "solver"},
    "cen": {"weight", "cen", "exponents", "solver"},
    "cantor": {"cantor"},
    "solve": {"weight", "domain", "boundary", "data", "exponents", "solver"},
    "meyers": {"weight", "domain", "boundary", "data", "exponents", "solver",
               "meyers"},
    "local": {"weight", "domain", "boundary", "data", "exponents", "solver",
              "local"},
}

_SECTION_KEYS = {
    "domain": {"center", "r", "m"},
    "weight": _WEIGHT_KEYS,
    "boundary": _BOUNDARY_KEYS,
    "data": {"kind", "fx", "fy", "w"},
    "exponents": {"p", "q", "delta_grid", "q_sub"},
    "solver": {"tol", "max_newton", "eps_schedule"},
    "ap": {"depth", "random_samples"},
    "capacity": {"shape", "gamma"},
    "scaling": {"shape", "scales", "cells_per_axis", "outer_factor"},
    "poincare": {"shape"},
    "comparability": {"shape", "scales", "cells_per_axis"},
    "cen": {"set", "centers", "radii", "truncation", "cells_per_axis", "h",
            "mu_cells"},
    "cantor": {"lam", "level"},
    "meyers": {"levels"},
    "local": {"checks", "n_cubes", "radii_cells", "variant"},
    "shape": {"kind", "center", "r", "points", "a", "b"},
    "set": {"kind", "lam", "level", "y", "intervals", "points"},
}


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}")


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _check_keys(violations, table, allowed, where):
    for key in table:
        if key not in allowed:
            violations.append(f"{where}.{key}: unknown key")


def validate(cfg, subcommand=None):
    """All constraint violations of a parsed config; empty list when valid.

    With ``subcommand=None`` the config's own ``subcommand`` key is used
    when present, otherwise only the constraint checks and the union of the
    per-subcommand key schemas apply.
    """
    v = []
    if subcommand is None:
        subcommand = cfg.get("subcommand")
    declared = cfg.get("subcommand")
    if declared is not None and subcommand is not None and declared != subcommand:
        v.append(f"subcommand: config declares {declared!r}, ran {subcommand!r}")
    if subcommand is None:
        allowed = set().union(*(_SCHEMA[s] for s in _SCHEMA)) | _SCHEMA["common"]
        where = "config"
    elif subcommand not in _SCHEMA:
        return [f"unknown subcommand {subcommand!r}"]
    else:
        allowed = _SCHEMA[subcommand] | _SCHEMA["common"]
        where = subcommand
    _check_keys(v, cfg, allowed, where)
    for section, table in cfg.items():
        if isinstance(table, dict) and section in _SECTION_KEYS:
            _check_keys(v, table, _SECTION_KEYS[section], section)
            for sub in ("shape", "set"):
                if isinstance(table.get(sub), dict):
                    _check_keys(v, table[sub], _SECTION_KEYS[sub],
                                f"{section}.{sub}")
    exps = cfg.get("exponents", {})
    p = exps.get("p")
    q = exps.get("q")
    if p is not None and not p > 1:
        v.append("exponents.p: p must exceed 1")
    if q is not None:
        if not q > 1:
            v.append("exponents.q: q must exceed 1")
        if p is not None and q > p:
            v.append("exponents.q: requires 1 < q <= p")
    for where, lam in (("boundary", cfg.get("boundary", {}).get("lam")),
                       ("cantor", cfg.get("cantor", {}).get("lam")),
                       ("cen.set", cfg.get("cen", {}).get("set", {}).get("lam"))):
        if lam is not None and not (0 < lam < 0.5):
            v.append(f"{where}.lam: lambda must be in (0, 1/2)")
    gamma = cfg.get("capacity", {}).get("gamma")
    if gamma is not None and not (0 < gamma < 0.5):
        v.append("capacity.gamma: gamma must be in (0, 1/2)")
    m = cfg.get("domain", {}).get("m")
    if m is not None and m < 2:
        v.append("domain.m: need at least 2 cells per axis")
    depth = cfg.get("ap", {}).get("depth")
    if depth is not None and not (1 <= depth <= 9):
        v.append("ap.depth: depth must be in 1..9")
    wkind = cfg.get("weight", {}).get("kind")
    if wkind is not None and wkind not in ("constant", "power", "product"):
        v.append("weight.kind: must be constant, power, or product")
    return v


# --- builders ----------------------------------------------------------------


def _scalar_weight(wcfg):
    kind = wcfg.get("kind", "constant")
    if kind == "constant":
        return ScalarWeight.constant(wcfg.get("c", 1.0))
    if kind == "power":
        return ScalarWeight.power(wcfg.get("center", (0.0, 0.0)),
                                  wcfg["exponent"])
    if kind == "product":
        return ScalarWeight.product(tuple(_scalar_weight(f)
                                          for f in wcfg["factors"]))
    raise ConfigError(f"weight.kind: unknown kind {kind!r}")


def _matrix_weight(wcfg):
    return MatrixWeight(
        _scalar_weight(wcfg),
        kappa=wcfg.get("kappa", 1.0),
        theta=wcfg.get("theta", 0.0),
        lam=wcfg.get("lambda_bound", max(1.0, 1.0 / wcfg.get("kappa", 1.0))),
        form=wcfg.get("form", "measure"),
    )


def _grid(cfg):
    dom = cfg.get("domain", {})
    box = Box(tuple(dom.get("center", (0.0, 0.0))), dom.get("r", 1.0))
    return Grid(box, dom.get("m", 32))


def _expr(text):
    code = compile(text, "<config expression>", "eval")

    def fn(x, y):
        return eval(code, {"__builtins__": {}},
                    dict(_EXPR_NAMES, x=x, y=y))

    return fn


def _data_field(cfg, grid):
    data = cfg.get("data", {"kind": "zero"})
    kind = data.get("kind", "zero")
    if kind == "zero":
        return VectorField.from_callable(grid, lambda xy: np.zeros_like(xy))
    if kind == "expression":
        fx, fy = _expr(data["fx"]), _expr(data["fy"])

        def fn(xy):
            x, y = xy[:, 0], xy[:, 1]
            return np.column_stack([np.broadcast_to(fx(x, y), x.shape),
                                    np.broadcast_to(fy(x, y), x.shape)])

        return VectorField.from_callable(grid, fn)
    if kind == "gradient":
        w_fn = _expr(data["w"])
        nodal = DiscreteField.from_callable(
            grid, lambda xy: np.broadcast_to(w_fn(xy[:, 0], xy[:, 1]),
                                             xy[:, 0].shape))
        return gradient_at_quadpoints(nodal)
    raise ConfigError(f"data.kind: unknown kind {kind!r}")


def _shape(scfg):
    kind = scfg.get("kind", "box")
    if kind == "box":
        return Box(tuple(scfg.get("center", (0.0, 0.0))), scfg["r"])
    if kind == "points":
        return np.asarray(scfg["points"], dtype=float)
    if kind == "segment":
        return (tuple(scfg["a"]), tuple(scfg["b"]))
    raise ConfigError(f"shape.kind: unknown kind {kind!r}")


def _solver_opts(cfg):
    solver = cfg.get("solver", {})
    opts = {}
    if "tol" in solver:
        opts["tol"] = float(solver["tol"])
    if "max_newton" in solver:
        opts["max_newton"] = int(solver["max_newton"])
    if "eps_schedule" in solver:
        opts["eps_schedule"] = tuple(float(e) for e in solver["eps_schedule"])
    return opts


def _zaremba_problem(cfg):
    grid = _grid(cfg)
    W = _matrix_weight(cfg.get("weight", {}))
    boundary = mark_dirichlet(grid, cfg["boundary"])
    G = _data_field(cfg, grid)
    p = cfg.get("exponents", {}).get("p", 2.0)
    return ZarembaProblem(W.form, p, W, grid, boundary, G)


# --- output ------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows, chash):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        fh.write(f"# config_hash={chash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _nodal_rows(field):
    xy = field.grid.node_xy()
    return [(i, xy[i, 0], xy[i, 1], field.values[i])
            for i in range(field.grid.nnodes)]


# --- subcommand implementations ----------------------------------------------


def _run_ap(cfg, outdir, chash):
    w = _scalar_weight(cfg["weight"])
    dom = cfg.get("domain", {})
    box = Box(tuple(dom.get("center", (0.0, 0.0))), dom.get("r", 1.0))
    ap = cfg.get("ap", {})
    est = ap_constant_estimate(w, cfg["exponents"]["p"] if "exponents" in cfg
                               else 2.0, box, ap.get("depth", 5),
                               ap.get("random_samples", 0),
                               seed=cfg.get("seed", 0))
    rows = [(est.value, est.p, est.depth, est.cube_count,
             est.max_cube.center[0], est.max_cube.center[1], est.max_cube.r)]
    write_csv(os.path.join(outdir, "ap.csv"),
              ["value", "p", "depth", "cube_count", "cube_cx", "cube_cy",
               "cube_r"], rows, chash)
    return {"value": est.value, "cube_count": est.cube_count}, ["ap.csv"]


def _run_capacity(cfg, outdir, chash):
    w = _scalar_weight(cfg["weight"])
    grid = _grid(cfg)
    K = interior_set(grid, _shape(cfg["capacity"]["shape"]))
    q = cfg.get("exponents", {}).get("q", 2.0)
    res = compute_capacity(CapacityProblem(q, w, K, grid),
                           **_solver_opts(cfg))
    r = grid.box.r / 2.0
    from .assembly import grid_weighted_measure
    mu_Q = grid_weighted_measure(grid, w)
    s = w.alpha if w.kind == "power" else 0.0
    rows = [(r, grid.m, q, s, res.value, mu_Q, res.value * r ** q / mu_Q,
             res.iterations)]
    write_csv(os.path.join(outdir, "capacity.csv"),
              ["r", "m", "q", "s", "capacity", "mu_Q", "ratio", "iterations"],
              rows, chash)
    write_csv(os.path.join(outdir, "potential.csv"),
              ["index", "x1", "x2", "u"], _nodal_rows(res.potential), chash)
    summary = {"capacity": res.value, "iterations": res.iterations}
    gamma = cfg["capacity"].get("gamma")
    if gamma is not None:
        label, ratio = classify_negligible(K, w, q, gamma, r, grid)
        summary.update({"classification": label, "density_ratio": ratio})
    return summary, ["capacity.csv", "potential.csv"]


def _run_scaling(cfg, outdir, chash):
    w = _scalar_weight(cfg["weight"])
    sc = cfg["scaling"]
    rep = capacity_scaling_check(
        _shape(sc["shape"]), w, cfg["exponents"]["q"],
        [float(s) for s in sc["scales"]],
        cells_per_axis=sc.get("cells_per_axis", 64),
        outer_factor=sc.get("outer_factor", 2.0), **_solver_opts(cfg))
    rows = [(e.r, e.m, e.q, e.s, e.capacity, e.mu_Q, e.ratio, e.iterations)
            for e in rep.entries]
    write_csv(os.path.join(outdir, "scaling.csv"),
              ["r", "m", "q", "s", "capacity", "mu_Q", "ratio", "iterations"],
              rows, chash)
    return {"fitted_slope": rep.slope, "theory_slope": rep.theory_slope}, \
        ["scaling.csv"]


def _run_poincare(cfg, outdir, chash):
    w = _scalar_weight(cfg["weight"])
    grid = _grid(cfg)
    shape_cfg = cfg.get("poincare", {}).get("shape")
    if shape_cfg is None:
        K = NodeSet(grid, grid.boundary_nodes())
    else:
        K = interior_set(grid, _shape(shape_cfg))
    exps = cfg.get("exponents", {})
    res = poincare_constant(grid, K, w, exps.get("p", 2.0), exps.get("q", 2.0))
    write_csv(os.path.join(outdir, "maximizer.csv"),
              ["index", "x1", "x2", "u"], _nodal_rows(res.maximizer), chash)
    return {"C": res.C, "method": res.method, "bound_kind": res.bound_kind}, \
        ["maximizer.csv"]


def _run_comparability(cfg, outdir, chash):
    w = _scalar_weight(cfg["weight"])
    cc = cfg["comparability"]
    exps = cfg.get("exponents", {})
    p, q = exps.get("p", 2.0), exps.get("q", 2.0)
    shape = _shape(cc["shape"])
    rows = []
    ratios = []
    for r in cc["scales"]:
        grid = Grid(Box(shape.center, float(r)), cc.get("cells_per_axis", 32))
        K = interior_set(grid, Box(shape.center, shape.r * float(r)))
        rep = comparability_ratio(grid, K, w, q, p)
        rows.append((rep.r, rep.m, rep.q, rep.p, rep.C, rep.capacity,
                     rep.mu_Q2r, rep.ratio))
        ratios.append(rep.ratio)
    write_csv(os.path.join(outdir, "comparability.csv"),
              ["r", "m", "q", "p", "C", "cap", "mu_Q2r", "ratio"], rows, chash)
    return {"max_ratio": max(ratios), "min_ratio": min(ratios),
            "spread": max(ratios) / min(ratios)}, ["comparability.csv"]


def _run_cen(cfg, outdir, chash):
    w = _scalar_weight(cfg["weight"])
    cen = cfg["cen"]
    dset = cen["set"]
    if dset.get("kind", "cantor_line") == "cantor_line":
        D = line_intervals(cantor_intervals(dset["lam"], dset["level"]),
                           y=dset.get("y", 0.0))
    elif dset["kind"] == "line_intervals":
        D = line_intervals(dset["intervals"], y=dset.get("y", 0.0))
    else:
        raise ConfigError(f"cen.set.kind: unknown kind {dset['kind']!r}")
    resolution = {"h": cen["h"]} if "h" in cen else \
        {"cells_per_axis": cen.get("cells_per_axis", 64)}
    q = cfg["exponents"]["q"]
    rep = verify_cen(D, w, q, [tuple(c) for c in cen["centers"]],
                     [float(r) for r in cen["radii"]],
                     truncation=cen.get("truncation", 4.0),
                     resolution=resolution, mu_cells=cen.get("mu_cells", 64),
                     **_solver_opts(cfg))
    rows = [(s.x0[0], s.x0[1], s.r, q, s.cap, s.mu_Qr, s.ratio)
            for s in rep.samples]
    write_csv(os.path.join(outdir, "cen.csv"),
              ["x0_1", "x0_2", "r", "q", "cap", "mu_Qr", "ratio"], rows, chash)
    return {"min_ratio": rep.min_ratio, "c0": rep.c0,
            "samples": len(rep.samples)}, ["cen.csv"]


def _run_cantor(cfg, outdir, chash):
    cc = cfg["cantor"]
    intervals = cantor_intervals(cc["lam"], cc["level"])
    rows = [(cc["level"], i, a, b) for i, (a, b) in enumerate(intervals)]
    write_csv(os.path.join(outdir, "cantor.csv"),
              ["k", "index", "a", "b"], rows, chash)
    total = sum(b - a for a, b in intervals)
    return {"count": len(intervals), "total_length": total,
            "dimension": geometry.cantor_dimension(cc["lam"])}, ["cantor.csv"]


def _run_solve(cfg, outdir, chash):
    prob = _zaremba_problem(cfg)
    res = solve_zaremba(prob, **_solver_opts(cfg))
    if not res.converged:
        raise ZarembaError("solve did not converge")
    write_csv(os.path.join(outdir, "solution.csv"),
              ["index", "x1", "x2", "u"], _nodal_rows(res.u), chash)
    summary = {"energy": res.energy,
               "weighted_grad_norm": res.weighted_grad_norm,
               "iterations": res.newton_iterations,
               "final_eps": res.final_eps,
               "residual_norm": res.residual_norm}
    if float(np.max(np.abs(prob.G.values))) > 0:
        summary["ratio"] = energy_ratio(prob, res)
    return summary, ["solution.csv"]


def _run_meyers(cfg, outdir, chash):
    base = dict(cfg)

    def factory(m):
        sub = dict(base)
        sub["domain"] = dict(base.get("domain", {}), m=int(m))
        return _zaremba_problem(sub)

    exps = cfg.get("exponents", {})
    rep = meyers_scan(factory, [float(d) for d in exps.get("delta_grid", [0.0])],
                      [int(m) for m in cfg["meyers"]["levels"]],
                      **_solver_opts(cfg))
    rows = [(e.delta, e.m, e.N_u, e.N_G, e.ratio,
             rep.stable.get(e.delta, False)) for e in rep.entries]
    write_csv(os.path.join(outdir, "meyers.csv"),
              ["delta", "m", "N_u", "N_G", "ratio", "stable"], rows, chash)
    return {"stable": {str(k): bool(v) for k, v in rep.stable.items()},
            "flags": rep.data_flags}, ["meyers.csv"]


def _run_local(cfg, outdir, chash):
    prob = _zaremba_problem(cfg)
    res = solve_zaremba(prob, **_solver_opts(cfg))
    loc = cfg["local"]
    cubes = sample_cubes(prob.grid, prob.boundary, loc.get("n_cubes", 20),
                         radii_cells=tuple(loc.get("radii_cells", (4, 8, 16))),
                         variant=loc.get("variant", "interior"),
                         seed=cfg.get("seed", 0))
    outputs = []
    summary = {}
    checks = loc.get("checks", ["caccioppoli", "reverse_holder"])
    for check in checks:
        if check == "caccioppoli":
            rep = caccioppoli_check(prob, res, cubes)
        elif check == "reverse_holder":
            rep = reverse_holder_check(prob, res, cubes,
                                       cfg["exponents"].get("q_sub",
                                                            (1 + prob.p) / 2))
        else:
            raise ConfigError(f"local.checks: unknown check {check!r}")
        name = f"local_{check}.csv"
        rows = [(e.center[0], e.center[1], e.r, e.lhs, e.rhs, e.ratio)
                for e in rep.entries]
        write_csv(os.path.join(outdir, name),
                  ["cube_cx", "cube_cy", "r", "lhs", "rhs", "ratio"],
                  rows, chash)
        outputs.append(name)
        summary[check] = rep.empirical_constant
    return summary, outputs


_RUNNERS = {
    "ap": _run_ap,
    "capacity": _run_capacity,
    "scaling": _run_scaling,
    "poincare": _run_poincare,
    "comparability": _run_comparability,
    "cen": _run_cen,
    "cantor": _run_cantor,
    "solve": _run_solve,
    "meyers": _run_meyers,
    "local": _run_local,
}


def run(subcommand, config_path, outdir=None):
    """Validate, execute, and write outputs; returns the summary dict."""
    cfg = load_config(config_path)
    violations = validate(cfg, subcommand)
    if violations:
        raise ConfigError("; ".join(violations))
    chash = config_hash(cfg)
    if outdir is None:
        outdir = os.environ.get("ZAREMBA_OUTDIR", cfg.get("output_dir", "out"))
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    scalars, outputs = _RUNNERS[subcommand](cfg, outdir, chash)
    summary = {
        "subcommand": subcommand,
        "config_hash": chash,
        "wall_time_s": time.perf_counter() - t0,
        "results": scalars,
        "outputs": outputs,
    }
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="zaremba",
        description="config-driven experiments: weighted capacities, "
                    "Muckenhoupt constants, Poincare constants, and "
                    "mixed-boundary degenerate-weight solves")
    parser.add_argument("subcommand", choices=SUBCOMMANDS + ("validate",))
    parser.add_argument("config", help="path to a TOML config file")
    parser.add_argument("--outdir", default=None,
                        help="output directory (overrides env and config)")
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "validate":
            violations = validate(load_config(args.config))
            for line in violations:
                print(line)
            return 0 if not violations else 2
        summary = run(args.subcommand, args.config, outdir=args.outdir)
        print(json.dumps(summary["results"], sort_keys=True))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ZarembaError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    orlicz check --config run.json [--out DIR] [--strict]
    orlicz solve --config run.json --mode global-min|mountain-pass|concave-convex [--out DIR]
    orlicz sweep --config run.json --lambdas 1 0.5 0.25 [--out DIR]

Exit codes: 0 success, 1 configuration or usage error, 2 solver failure
(non-convergence or missing geometry), 3 condition violations under --strict.
The environment variable ORLICZ_SEED overrides ``solver.seed``.
"""
import argparse
import csv
import json
import os
import sys

import numpy as np

from . import discretize as D
from . import nfunction as NF
from . import nonlinearity as NL
from . import solvers as S
from .config import load_config
from .errors import ConfigurationError, OrliczError, SolverError
from .trends import _jsonable, log_grid

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_STRICT = 0, 1, 2, 3

MODES = {
    "global-min": {"sublinear", "zero"},
    "mountain-pass": {"power_of_phi", "concave_convex", "zero"},
    "concave-convex": {"concave_convex"},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="orlicz", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("check", "verify N-function and nonlinearity conditions"),
                        ("solve", "compute critical points"),
                        ("sweep", "concave-convex pair search over a list of lambdas")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--config", required=True, help="JSON run configuration")
        c.add_argument("--out", help="output directory (overrides output.dir)")
        c.add_argument("--strict", action="store_true", help="exit 3 on any violated condition")
        if name == "solve":
            c.add_argument("--mode", required=True, choices=sorted(MODES))
        if name == "sweep":
            c.add_argument("--lambdas", nargs="*", type=float, default=None,
                           help="lambda values, processed in the given order")
    return p


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2)
        fh.write("\n")


def _out_path(cfg, out_dir, suffix):
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, f"{cfg.output['prefix']}_{suffix}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_checks(cfg):
    """All condition probes for the configured N-function and nonlinearity."""
    problem = cfg.build_problem()
    nf, nl, mesh = problem.nf, problem.nl, problem.mesh
    chk = cfg.check
    probe = NF.default_probe(nf)
    phi = NF.check_phi_conditions(nf, mesh.d, chk["p"], probe=probe, k_max=chk["k_max"])
    grid = probe.union[2 * probe.union <= nf.t_guard]
    delta2 = NF.check_delta2(nf, grid, k_max=chk["k_max"])
    ps_hi = min(10.0, 0.9 * nf.t_guard)
    ps = NF.ps_transform_check(nf, log_grid(1e-3, ps_hi))
    f1 = NL.check_f1(nl, nf)
    f2 = NL.check_f2(nl, nf, R=chk["R"])
    sup = NL.superlinearity_probe(nl, nf)
    f34 = NL.check_f3_f4(nl, nf, mesh.d, chk["delta"])
    violations = list(phi.violations)
    violations += [pid for pid, ok in (("f1", f1.holds), ("f2", f2.holds),
                                       ("superlinear", sup.holds), ("f3", f34["f3_holds"]),
                                       ("f4", f34["f4_holds"])) if not ok]
    if not ps.e2_holds:
        violations.append("E2")
    if not ps.e3_holds:
        violations.append("E3")
    return {
        "nfunction": nf.to_dict(),
        "nonlinearity": nl.to_dict(),
        "mesh_spec": mesh.to_dict(),
        "phi_conditions": phi.to_dict(),
        "delta2": delta2.to_dict(),
        "ps_transform": ps.to_dict(),
        "f_probes": {"f1": f1.to_dict(), "f2": f2.to_dict(), "superlinear": sup.to_dict(),
                     "f3_f4": f34},
        "violations": violations,
    }


def cmd_check(cfg, out_dir, strict):
    report = run_checks(cfg)
    _write_json(_out_path(cfg, out_dir, "check.json"), report)
    for v in report["violations"]:
        print(f"violated: {v}")
    if strict and report["violations"]:
        return EXIT_STRICT
    return EXIT_OK


def _solution_report(cfg, sol, lambda_used=None, diagnostics=None):
    rep = sol.report(mesh=cfg.mesh, family_spec=cfg.family_spec(), seed=cfg.solver.seed,
                     lambda_used=lambda_used)
    if diagnostics:
        rep["diagnostics"] = _jsonable(diagnostics)
    return rep


def cmd_solve(cfg, mode, out_dir):
    family = cfg.nonlinearity.get("family")
    if family not in MODES[mode]:
        print(f"error: mode {mode} needs a family in {sorted(MODES[mode])}, got {family}",
              file=sys.stderr)
        return EXIT_CONFIG
    problem = cfg.build_problem()
    scfg = cfg.solver
    try:
        if mode == "global-min":
            sol = S.global_minimize(problem, scfg)
            outputs = [("global-min", sol, None, sol.info)]
        elif mode == "mountain-pass":
            ep = S.find_e_point(problem, scfg)
            sol = S.mountain_pass(problem, scfg, e=ep["e"])
            diag = {"t_e": ep["t_e"], "A": ep["A"], "B": ep["B"], "e_energy": ep["energy"],
                    "moves": sol.info["moves"], "path_length": sol.info["path_length"],
                    "path_max": sol.info["path_max"]}
            outputs = [("mountain-pass", sol, None, diag)]
        else:
            res = S.concave_convex(problem, scfg)
            diag = {"ring_r": res.ring["r"], "ring_rho": res.ring["rho"],
                    "sweep": res.sweep, "separation_inf": res.separation}
            outputs = [("concave-convex_min", res.u_min, res.lambda_used, diag),
                       ("concave-convex_mp", res.w_mp, res.lambda_used, diag)]
    except SolverError as exc:
        print(f"solver failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for stem, sol, lam, diag in outputs:
        _write_json(_out_path(cfg, out_dir, f"{stem}.json"),
                    _solution_report(cfg, sol, lam, diag))
        D.write_field_csv(_out_path(cfg, out_dir, f"{stem}.csv"), cfg.mesh, sol.field)
        print(f"{stem}: {sol.classification} energy={sol.energy!r} "
              f"residual_inf={sol.residual_inf:.3e} iterations={sol.iterations}")
    return EXIT_OK


def sweep_rows(problem, scfg, lambdas):
    """One row per lambda: whether a certified pair was found and its data."""
    rows = []
    for lam in lambdas:
        prob = problem.with_nonlinearity(NL.with_lambda(problem.nl, lam))
        row = {"lambda": lam, "found_pair": False, "I_min": np.nan, "I_mp": np.nan,
               "residual_min": np.nan, "residual_mp": np.nan}
        try:
            u_min, w_mp, _ = S.solve_pair(prob, scfg)
        except SolverError:
            pass
        else:
            row.update(found_pair=lam > 0, I_min=u_min.energy, I_mp=w_mp.energy,
                       residual_min=u_min.residual_inf, residual_mp=w_mp.residual_inf)
        rows.append(row)
    return rows


def cmd_sweep(cfg, lambdas, out_dir):
    if not lambdas:
        print("error: --lambdas needs at least one value", file=sys.stderr)
        return EXIT_CONFIG
    if any(lam < 0 for lam in lambdas):
        print("error: lambdas must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.nonlinearity.get("family") != "concave_convex":
        print("error: sweep needs the concave_convex family", file=sys.stderr)
        return EXIT_CONFIG
    rows = sweep_rows(cfg.build_problem(), cfg.solver, lambdas)
    cols = ["lambda", "found_pair", "I_min", "I_mp", "residual_min", "residual_mp"]
    with open(_out_path(cfg, out_dir, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([str(row[c]).lower() if c == "found_pair" else repr(float(row[c]))
                        for c in cols])
    for row in rows:
        print(f"lambda={row['lambda']!r} found_pair={row['found_pair']}")
    return EXIT_OK if any(r["found_pair"] for r in rows) else EXIT_SOLVER


def main(argv=None):
    args = build_parser().parse_args(argv)
    seed = os.environ.get("ORLICZ_SEED")
    try:
        if seed is not None:
            try:
                seed = int(seed)
            except ValueError:
                raise ConfigurationError(f"ORLICZ_SEED must be an integer, got {seed!r}") from None
        cfg = load_config(args.config, seed_override=seed)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or cfg.output["dir"]
    strict = args.strict or cfg.strict
    try:
        if args.command == "check":
            return cmd_check(cfg, out_dir, strict)
        if args.command == "solve":
            return cmd_solve(cfg, args.mode, out_dir)
        return cmd_sweep(cfg, args.lambdas, out_dir)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OrliczError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``hybrid-alloc``.

Exit codes: 0 ok, 1 solver failure, 2 invalid config, 3 infeasible mission.
Errors go to stderr as one JSON object with ``kind`` and ``message``.
"""
import argparse
import io
import json
import math
import os
import sys

import numpy as np

from . import config as cfgmod
from .arc_solver import reconstruct_trajectory, solve, solve_no_charge
from .errors import HybridAllocError
from .oracle import grid_search, grid_search_no_charge
from .scaling import build_scaled_ocp
from .scenarios import compare_architectures, range_sweep, simulate_climb
from .verification import check_ssc, sensitivity

ORACLE_BAND = 0.05  # percent
# CLI parameter name -> (ScaledOCP parameter, d(scaled)/d(cli) factor getter)
_SENS_PARAMS = {
    "t_f": ("t_f", lambda ocp, ac: 1.0),
    "m0": ("m0", lambda ocp, ac: 1.0),
    "soc0": ("qhat0", lambda ocp, ac: ocp.a2 * ac.battery.capacity),
    "soc_f": ("qhatf", lambda ocp, ac: ocp.a2 * ac.battery.capacity),
}


def fmt(x):
    """12 significant digits; integers and text pass through."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def csv_text(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_out(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _kv(**items):
    for k, v in items.items():
        if isinstance(v, (list, tuple, np.ndarray)):
            v = " ".join(fmt(e) for e in v)
        else:
            v = fmt(v)
        print(f"{k}={v}")


def _load(args):
    path = args.config or os.environ.get(cfgmod.CONFIG_ENV)
    return cfgmod.default_config() if path is None else cfgmod.load(path)


def _problem(cfg, no_charge=False):
    ac = cfgmod.build_aircraft(cfg)
    mission = cfgmod.mission_spec(cfg)
    if no_charge:
        mission = cfgmod.mission_spec(cfg, charging_allowed=False)
    return ac, mission, build_scaled_ocp(ac, mission)


def cmd_solve(args, cfg):
    no_charge = args.no_charge or not cfg.mission.charging_allowed
    ac, mission, ocp = _problem(cfg, no_charge)
    sol = solve_no_charge(ocp) if no_charge else solve(ocp, tol=cfg.solver.tolerance,
                                                      max_iter=cfg.solver.max_iterations)
    p = sol.params
    _kv(structure=sol.structure, fuel_kg=sol.fuel_burned, final_mass_kg=sol.final_mass,
        xi=[p.xi1, p.xi2, p.xi3], z=p.z, duals=sol.duals, objective=sol.objective,
        residual_norm=sol.residual_norm, iterations=sol.iterations)
    if args.trajectory:
        tr = reconstruct_trajectory(sol, ocp, cfg.solver.trajectory_samples)
        rows = zip(tr.t, tr.mass, tr.charge, tr.throttle, tr.sfc, tr.arc)
        write_out(csv_text(["t_s", "mass_kg", "charge_Ah", "throttle", "sfc_kg_per_kWh", "arc"],
                           rows), args.trajectory)
    return 0


def cmd_check_ssc(args, cfg):
    ac, mission, ocp = _problem(cfg)
    sol = solve(ocp, tol=cfg.solver.tolerance, max_iter=cfg.solver.max_iterations)
    rep = check_ssc(sol, ocp)
    print(rep.summary())
    _kv(grad_norm=rep.grad_norm, jacobian_rank=rep.jacobian_rank, kernel_dim=rep.kernel_dim,
        projected_hessian_min_eig=rep.projected_hessian_min_eig,
        curvature_vacuous=rep.curvature_vacuous)
    return 0 if rep.ssc_holds else 1


def cmd_sensitivity(args, cfg):
    ac, mission, ocp = _problem(cfg)
    sol = solve(ocp, tol=cfg.solver.tolerance, max_iter=cfg.solver.max_iterations)
    name, factor = _SENS_PARAMS[args.param]
    rep = sensitivity(sol, ocp, parameter=name)
    f = factor(ocp, ac)
    _kv(parameter=args.param, dG_dp=rep.dG_dp * f, dx_dp=rep.dx_dp * f,
        drho_dp=rep.drho_dp * f)
    if args.param == "t_f":
        _kv(fuel_kg_per_km=rep.dG_dp / ocp.a1 / (mission.range / 1000.0))
    return 0


def cmd_verify_oracle(args, cfg):
    ac, mission, ocp = _problem(cfg)
    s = cfg.solver
    ok = True
    for label, solver, oracle in (
            ("charging", lambda: solve(ocp, tol=s.tolerance, max_iter=s.max_iterations),
             lambda: grid_search(ocp, s.oracle_resolution, s.oracle_steps, s.oracle_refine)),
            ("no_charge", lambda: solve_no_charge(ocp),
             lambda: grid_search_no_charge(ocp, s.oracle_resolution, s.oracle_steps))):
        sol, orc = solver(), oracle()
        delta = 100.0 * (orc.fuel - sol.fuel_burned) / sol.fuel_burned
        passed = orc.feasible and abs(delta) <= 100.0 * s.oracle_tolerance
        ok = ok and passed
        _kv(**{f"{label}_solver_fuel_kg": sol.fuel_burned,
               f"{label}_oracle_fuel_kg": orc.fuel,
               f"{label}_delta_percent": delta,
               f"{label}_oracle_t": [orc.best_t1, orc.best_t2]})
        print(f"{label}: {'PASS' if passed else 'FAIL'}")
    return 0 if ok else 1


def cmd_climb(args, cfg):
    ac = cfgmod.build_aircraft(cfg)
    spec = cfgmod.climb_spec(cfg)
    rows = []
    for n, mass in cfgmod.climb_masses(cfg).items():
        r = simulate_climb(ac.with_parallel_paths(n), spec, mass)
        rows.append((n, mass, r.fuel, r.soc_after, r.remaining, r.duration))
    write_out(csv_text(["n_parallel", "takeoff_mass_kg", "fuel_kg", "soc_after",
                        "remaining_Ah", "duration_s"], rows), args.out)
    return 0


def cmd_sweep(args, cfg):
    ac = cfgmod.build_aircraft(cfg)
    sc = cfg.scenarios
    res = range_sweep(ac, cfgmod.cruise_cases(cfg), sc.ranges_km, sc.cruise_speed,
                      sc.altitude, cfg.mission.air_density)
    rows = [("point", lab, r, res.fuel[(lab, r)], "", "", "")
            for lab in res.labels for r in res.ranges_km]
    for lab in res.labels:
        f = res.fits.get(lab)
        if f is not None:
            rows.append(("fit", lab, "", "", f.slope, f.intercept, f.r2))
    write_out(csv_text(["kind", "case", "range_km", "fuel_kg", "slope_kg_per_km",
                        "intercept_kg", "r2"], rows), args.out)
    for key, reason in res.gaps.items():
        print(json.dumps({"gap": list(key), "reason": reason}), file=sys.stderr)
    return 0


def cmd_compare(args, cfg):
    ac, mission, ocp = _problem(cfg)
    sc = cfg.scenarios
    rep = compare_architectures(ac, mission, cfgmod.cruise_cases(cfg), cfgmod.climb_spec(cfg),
                                cfgmod.climb_masses(cfg), speed=sc.cruise_speed,
                                altitude=sc.altitude, density=cfg.mission.air_density)
    rows = [("mission", "charging", "", 1, "", rep.charging_fuel, rep.charging_fuel),
            ("mission", "no_charge", "", 0, "", rep.no_charge_fuel, rep.no_charge_fuel)]
    rows += [("sizing", r.label, r.n_parallel, int(r.charging_allowed), r.climb_fuel,
              r.cruise_fuel, r.total_fuel) for r in rep.rows]
    write_out(csv_text(["kind", "label", "n_parallel", "charging", "climb_fuel_kg",
                        "cruise_fuel_kg", "total_fuel_kg"], rows), args.out)
    out = sys.stderr if args.out in (None, "-") else sys.stdout
    print(f"delta_kg={fmt(rep.delta)}", file=out)
    print(f"delta_percent={fmt(rep.delta_percent)}", file=out)
    print(f"verdict={rep.verdict}", file=out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hybrid-alloc",
                                description="Fuel-optimal power allocation for a parallel "
                                            "hybrid-electric aircraft cruise.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON run config (default: ${cfgmod.CONFIG_ENV} "
                                         "or the bundled case)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve the configured cruise mission")
    s.add_argument("--no-charge", action="store_true", help="forbid in-flight charging")
    s.add_argument("--trajectory", metavar="OUT.csv", help="write the optimal trajectory")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check-ssc", parents=[common], help="second-order optimality check")
    s.set_defaults(func=cmd_check_ssc)

    s = sub.add_parser("sensitivity", parents=[common], help="first-order parametric sensitivity")
    s.add_argument("--param", choices=sorted(_SENS_PARAMS), default="t_f")
    s.set_defaults(func=cmd_sensitivity)

    s = sub.add_parser("verify-oracle", parents=[common],
                       help="compare the solver against the RK4 grid search")
    s.set_defaults(func=cmd_verify_oracle)

    for name, func, helptext in (("climb", cmd_climb, "climb fuel per pack size"),
                                 ("sweep", cmd_sweep, "fuel versus range for every case"),
                                 ("compare", cmd_compare, "architecture comparison report")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--out", metavar="OUT.csv", help="CSV destination (default stdout)")
        s.set_defaults(func=func)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        return args.func(args, cfg)
    except OSError as exc:
        err = {"kind": "config", "message": f"{exc.filename}: {exc.strerror}"}
        code = 2
    except HybridAllocError as exc:
        err = {"kind": exc.kind, "message": str(exc)}
        code = exc.exit_code
    print(json.dumps(err), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Experiment runner with machine-readable CSV reports.

Usage:
    fournls --config experiment.toml [--out DIR] [--threads N] [--seed U64]

The config is a TOML file; the subcommand and all knobs live inside it so
an experiment is reproducible from the file alone (the seed may be
overridden on the command line).  Exit status: 0 when every assertion in
the experiment held, 1 when some assertion failed (the first violating
record is printed), 2 on a usage or configuration error.

Subcommands
    simulate            integrate and report conserved quantities
    verify-identities   exact multiplier identity sweeps
    verify-bounds       certificate and pointwise-bound sampling
    nf-residual         transformed-evolution residual convergence study
    counterexample-scan sharpness family scaling scan
    continuity          data-to-solution perturbation response

Numbers in reports carry 17 significant digits, so identical configs and
seeds produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
import tomllib

import numpy as np

from fournls import bounds as bounds_mod
from fournls import normalform as nf
from fournls.conserved import EquationParams, all_invariants, check_conditions, preset
from fournls.fields import SpectralField, sobolev_norm
from fournls.phase import counterexample_scan, fit_loglog_slope
from fournls.solver import SolverConfig, integrate, interaction_picture, solution_map_experiment


class UsageError(ValueError):
    pass


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _params_from(cfg) -> EquationParams:
    sec = cfg.get("params", {})
    if "preset" in sec:
        kw = {k: v for k, v in sec.items() if k != "preset"}
        return preset(sec["preset"], **kw)
    keys = ("lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "mu", "lambda6")
    return EquationParams(**{k: float(sec.get(k, 0.0)) for k in keys})


def _initial_from(cfg, K) -> SpectralField:
    sec = cfg.get("initial", {"preset": "smooth"})
    if sec.get("preset") == "smooth":
        return SpectralField.from_modes([(1, 1.0), (2, 0.1)], K)
    if "modes" in sec:
        modes = [(int(m["k"]), float(m.get("re", 0.0)) + 1j * float(m.get("im", 0.0)))
                 for m in sec["modes"]]
        return SpectralField.from_modes(modes, K)
    raise UsageError("initial: need preset = 'smooth' or a modes list")


def _solver_from(cfg) -> SolverConfig:
    sec = cfg.get("solver", {})
    try:
        return SolverConfig(
            form=sec.get("form", "NLS4_3"), K=int(sec.get("K", 32)),
            dt=float(sec.get("dt", 1e-4)), T=float(sec.get("T", 0.1)),
            integrator=sec.get("integrator", "rk4_interaction"),
            padding=int(sec.get("padding", 3)),
            save_every=int(sec.get("save_every", 1)))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"solver: {exc}") from exc


def _nf_from(cfg, p, phi0) -> nf.NormalFormConfig:
    sec = cfg.get("normal_form", {})
    gamma = nf.gamma_of(p, phi0)
    L = float(sec.get("L", 256.0 * max(1.0, abs(gamma))))
    return nf.NormalFormConfig(L=L, K=phi0.K, s=float(sec.get("s", 1.0)), gamma=gamma)


def _field_json(f: SpectralField):
    return [[float(c.real), float(c.imag)] for c in f.coeffs]


# ---------------------------------------------------------------------------
# subcommands (each returns the number of assertion failures)
# ---------------------------------------------------------------------------


def run_simulate(cfg, out, seed):
    p = _params_from(cfg)
    sc = _solver_from(cfg)
    phi0 = _initial_from(cfg, sc.K)
    tol = float(cfg.get("verify", {}).get("tolerance", 1e-6))
    s = float(cfg.get("normal_form", {}).get("s", 1.0))
    traj = integrate(phi0, p, sc)
    rows = []
    for t, u, c in zip(traj.times, traj.states, traj.gauge_c):
        inv = all_invariants(u, p)
        rows.append([t, inv["E1"], inv["E2"], inv["E3"], inv["E4"],
                     sobolev_norm(u, s), c])
    _write_csv(os.path.join(out, "trajectory.csv"),
               ["t", "E1", "E2", "E3", "E4", "Hs_norm", "gauge_c"], rows)
    import json
    snaps = {"K": traj.K, "times": [float(t) for t in traj.times],
             "coeffs": [_field_json(u) for u in traj.states]}
    with open(os.path.join(out, "snapshots.json"), "w") as fh:
        json.dump(snaps, fh)
    flags = check_conditions(p)
    watched = ["E1"] if flags.a1 or p.lambda5 == 0.0 else []
    if flags.a2:
        watched.append("E2")
    if flags.a3:
        watched.append("E3")
    if flags.hamiltonian:
        watched.append("E4")
    fails = 0
    base = rows[0]
    cols = {"E1": 1, "E2": 2, "E3": 3, "E4": 4}
    for name in watched:
        j = cols[name]
        ref = max(abs(base[j]), 1e-30)
        for row in rows:
            if abs(row[j] - base[j]) / ref > tol:
                print(f"FAIL {name} drift {abs(row[j]-base[j])/ref:.3e} at t={row[0]}")
                fails += 1
                break
    return fails


def run_verify_identities(cfg, out, seed):
    p = _params_from(cfg)
    sec = cfg.get("verify", {})
    r3 = int(sec.get("box_radius_3", 64))
    r5 = int(sec.get("box_radius_5", 8))
    L = float(sec.get("L", 4.0))
    gamma = sec.get("gamma", 0.0)
    ncfg = nf.NormalFormConfig(L=L, K=r5, gamma=gamma)
    t0 = time.time()
    reports = [nf.verify_partition(r3), nf.verify_cubic_split(r3)]
    rows = [[r.name, r.box_radius, r.violations, 0.0] for r in reports]
    for display in (1, 2):
        rep = nf.verify_region_product_identity(r5, p, ncfg, display)
        rows.append([rep.name, rep.box_radius, rep.violations, rep.max_abs_deviation])
    rep = nf.verify_quintic_expansion(r5, p, ncfg)
    rows.append([rep.name, rep.box_radius, rep.violations, rep.max_abs_deviation])
    rows.append(["runtime_s", 0, 0, time.time() - t0])
    _write_csv(os.path.join(out, "identities.csv"),
               ["identity", "box_radius", "violations", "max_abs_deviation"], rows)
    fails = sum(int(r[2]) for r in rows)
    nb = [r for r in reports if getattr(r, "non_binary", 0)]
    if nb:
        fails += 1
        print("FAIL complement region left {0,1}")
    return fails


def run_verify_bounds(cfg, out, seed):
    p = _params_from(cfg)
    sec = cfg.get("verify", {})
    n = int(sec.get("samples", 100000))
    kmax = int(sec.get("kmax", 10**4))
    gamma = float(sec.get("gamma", 4.0))
    L = float(sec.get("L", 256.0 * max(1.0, abs(gamma))))
    cap = float(sec.get("constant_cap", 1e3))
    rows, fails = [], 0
    t0 = time.time()
    for rep in (bounds_mod.survey_weight_bounds(n, p, gamma, L, seed=seed, kmax=kmax)
                + bounds_mod.survey_flow_bounds(n, p, gamma, L, seed=seed, kmax=kmax)):
        ok = rep.unbounded == 0 and rep.measured_constant < cap
        rows.append([rep.name, f"n={rep.samples}", rep.support_hits,
                     rep.measured_constant, rep.unbounded, int(not ok)])
        if not ok:
            fails += 1
            print(f"FAIL bound {rep.name}: C={rep.measured_constant}, "
                  f"unbounded={rep.unbounded}")
    certs = bounds_mod.sweep_certificates(int(sec.get("cert_samples", 20000)),
                                          float(sec.get("cert_gamma", 1.5)),
                                          seed=seed, kmax=kmax)
    for c in certs:
        rows.append([f"certificate {c.case}", f"n={c.certified}", c.certified,
                     c.min_margin, 0, int(c.min_margin < 1.0)])
        if c.min_margin < 1.0:
            fails += 1
    canc = nf.verify_cancellation(int(sec.get("cancel_samples", 10000)),
                                  int(sec.get("k5_max", 10**6)), p, seed=seed)
    ok = (np.isfinite(canc.max_sym_ratio) and canc.max_sym_ratio < cap
          and abs(canc.growth_exponent - 1.0) < 0.1)
    rows.append(["cancellation", f"n={canc.samples}", canc.samples,
                 canc.max_sym_ratio, canc.growth_exponent, int(not ok)])
    if not ok:
        fails += 1
        print(f"FAIL cancellation: ratio={canc.max_sym_ratio}, "
              f"slope={canc.growth_exponent}")
    rows.append(["runtime_s", "", 0, time.time() - t0, 0, 0])
    _write_csv(os.path.join(out, "bounds.csv"),
               ["check", "parameters", "hits", "value", "aux", "failed"], rows)
    return fails


def run_nf_residual(cfg, out, seed):
    p = _params_from(cfg)
    sc = _solver_from(cfg)
    phi0 = _initial_from(cfg, sc.K)
    ncfg = _nf_from(cfg, p, phi0)
    sec = cfg.get("verify", {})
    levels = int(sec.get("levels", 3))
    min_order = float(sec.get("min_order", 1.8))
    ablate = frozenset(tuple(a) for a in sec.get("ablate", []))
    rep = nf.nf_residual_study(phi0, p, ncfg, dt=sc.dt, T=sc.T, levels=levels,
                               ablate=ablate)
    rows = [[dt, r] for dt, r in zip(rep.dts, rep.norms)]
    rows.append(["order", rep.order_estimate])
    _write_csv(os.path.join(out, "nf_residual.csv"), ["dt", "residual"], rows)
    if ablate:
        return 0
    if rep.order_estimate is None or rep.order_estimate < min_order:
        print(f"FAIL residual order {rep.order_estimate} < {min_order}")
        return 1
    return 0


def run_counterexample_scan(cfg, out, seed):
    sec = cfg.get("verify", {})
    n_lo, n_hi = int(sec.get("n_lo", 2)), int(sec.get("n_hi", 20))
    rows = counterexample_scan(range(n_lo, n_hi + 1))
    _write_csv(os.path.join(out, "counterexample.csv"),
               ["n", "phi5", "bound", "ratio"],
               [[r["n"], r["phi5"], r["bound"], r["ratio"]] for r in rows])
    ns = [r["n"] for r in rows]
    slope = fit_loglog_slope(ns, [r["phi5"] for r in rows])
    slope_bound = fit_loglog_slope(ns, [r["bound"] for r in rows])
    fails = 0
    for r in rows:
        scaled = r["phi5"] / r["n"] ** 22
        if not 0.5 <= scaled <= 20.0:
            print(f"FAIL scaling at n={r['n']}: {scaled}")
            fails += 1
    if abs(slope - 22.0) > 0.5 or abs((slope_bound - slope) - 5.0) > 0.5:
        print(f"FAIL slopes: value {slope}, gap {slope_bound - slope}")
        fails += 1
    return fails


def run_continuity(cfg, out, seed):
    p = _params_from(cfg)
    sc = _solver_from(cfg)
    phi0 = _initial_from(cfg, sc.K)
    sec = cfg.get("verify", {})
    eps = [float(e) for e in sec.get("eps", [1e-2, 1e-3, 1e-4])]
    psi = SpectralField.from_modes([(1, 0.3), (3, 0.2)], sc.K)
    rows = solution_map_experiment(phi0, psi, eps, p, sc,
                                   s=float(sec.get("s", 1.0)))
    _write_csv(os.path.join(out, "continuity.csv"), ["eps", "ratio"],
               [[r["eps"], r["ratio"]] for r in rows])
    ratios = [r["ratio"] for r in rows]
    spread = (max(ratios) - min(ratios)) / max(ratios[-1], 1e-300)
    if spread > float(sec.get("max_spread", 0.05)):
        print(f"FAIL continuity spread {spread}")
        return 1
    return 0


_SUBCOMMANDS = {
    "simulate": run_simulate,
    "verify-identities": run_verify_identities,
    "verify-bounds": run_verify_bounds,
    "nf-residual": run_nf_residual,
    "counterexample-scan": run_counterexample_scan,
    "continuity": run_continuity,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fournls", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", required=True, help="TOML experiment file")
    ap.add_argument("--out", default=".", help="output directory for reports")
    ap.add_argument("--threads", type=int, default=0,
                    help="cap worker threads (0 = leave unchanged)")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the seed in the config")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        with open(args.config, "rb") as fh:
            cfg = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"usage error: config: {exc}", file=sys.stderr)
        return 2
    if args.threads:
        try:
            from threadpoolctl import threadpool_limits
            threadpool_limits(limits=args.threads)
        except ImportError:
            pass
    sub = cfg.get("experiment", {}).get("subcommand")
    if sub not in _SUBCOMMANDS:
        print(f"usage error: experiment.subcommand must be one of "
              f"{sorted(_SUBCOMMANDS)}, got {sub!r}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else int(
        cfg.get("experiment", {}).get("seed", 0))
    out = args.out
    os.makedirs(out, exist_ok=True)
    try:
        fails = _SUBCOMMANDS[sub](cfg, out, seed)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    if fails:
        print(f"{fails} assertion(s) failed")
        return 1
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())

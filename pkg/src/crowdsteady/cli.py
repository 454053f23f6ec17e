"""Command-line interface.

Subcommands: constants | shoot | branch | spectrum | lambda | evolve |
diagram | verify. Outputs are deterministic CSV/JSON files; every file embeds
the resolved configuration (as '#' comment lines in CSV, as a "config" object
in JSON). Numeric columns are written with 17 significant digits.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import constants as consts
from . import continuation as cont
from . import evolution as ev
from . import functionals as fnl
from . import shooting as shoot
from . import spectrum as spec
from .config import ConfigError, RunConfig, load_config
from .models import Model, neumann_eigenvalue
from .verification import ALL_CHECKS, QUICK_CHECKS, VerificationContext

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, (np.floating,)):
        return f"{float(x):.17g}"
    return str(x)


def _config_header(cfg: RunConfig) -> list[str]:
    return [f"# {k} = {v}" for k, v in cfg.as_items()]


def write_csv(path: Path, columns: list[str], rows: list[dict], cfg: RunConfig):
    lines = _config_header(cfg)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload: dict, cfg: RunConfig):
    doc = {"config": {k: v for k, v in cfg.as_items()}}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n",
                    encoding="utf-8")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [{"re": float(z.real), "im": float(z.imag)} for z in obj]
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_constants(cfg: RunConfig) -> int:
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    out = _outdir(cfg)
    folds = consts.fold_points(model, params, domain)
    if folds is not None:
        pad = 0.15 * (folds.phi0_plus - folds.phi0_minus)
        grid = np.linspace(folds.phi0_minus - pad, folds.phi0_plus + pad, cfg.phi0_count)
    else:
        grid = np.linspace(-20.0, 20.0, cfg.phi0_count)
    rows = []
    for phi0 in grid:
        for sol in consts.constant_solutions(model, params, float(phi0), domain):
            mu1, mu2 = sol.mu_roots_n1
            rows.append({
                "phi0": sol.phi0, "phi": sol.phi, "rho": sol.rho, "mass": sol.mass,
                "branch_label": sol.branch_label,
                "variationally_unstable": int(sol.variationally_unstable),
                "mu1_re": mu1.real, "mu1_im": mu1.imag,
                "mu2_re": mu2.real, "mu2_im": mu2.imag,
                "degenerate": int(sol.degenerate),
            })
    write_csv(out / "constants.csv",
              ["phi0", "phi", "rho", "mass", "branch_label", "variationally_unstable",
               "mu1_re", "mu1_im", "mu2_re", "mu2_im", "degenerate"], rows, cfg)
    interval = consts.instability_interval(model, params, domain)
    summary = {
        "lambda1": neumann_eigenvalue(domain, 1),
        "folds": None if folds is None else {
            "phi0_minus": folds.phi0_minus, "phi0_plus": folds.phi0_plus,
            "phi_at_folds": list(folds.phi_at_folds),
            "mass_lower_bound": folds.mass_lower_bound,
            "mass_upper_bound": folds.mass_upper_bound,
        },
        "instability_interval": None if interval is None else {
            "phi": list(interval.phi_interval), "mass": list(interval.mass_interval),
        },
    }
    write_json(out / "constants_summary.json", summary, cfg)
    print(f"wrote {out/'constants.csv'} ({len(rows)} rows)")
    return EXIT_OK


def cmd_shoot(cfg: RunConfig) -> int:
    if cfg.phi0 is None:
        raise ConfigError("shoot requires phi0")
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    out = _outdir(cfg)
    results = shoot.find_shooting_roots(model, params, cfg.phi0, domain.dim,
                                        scan_cells=cfg.scan_cells,
                                        n_grid=domain.n_cells,
                                        slope_tol=cfg.slope_tol)
    rows, prows = [], []
    for i, res in enumerate(results):
        prof = res.profile
        mass, frac = shoot.mass_of_profile(prof, domain)
        rows.append({
            "index": i, "a": prof.a, "terminal_slope": res.terminal_slope,
            "converged": int(res.converged), "diverged": int(res.diverged),
            "monotone": shoot.is_monotone(prof),
            "mass": mass, "mass_fraction": frac,
            "residual": shoot.bvp_residual(prof, model, params),
        })
        stride = max(1, domain.n_cells // 256)
        for j in range(0, prof.r.size, stride):
            prows.append({"index": i, "r": prof.r[j], "phi": prof.phi[j],
                          "dphi": prof.dphi[j]})
    write_csv(out / "shoot_roots.csv",
              ["index", "a", "terminal_slope", "converged", "diverged", "monotone",
               "mass", "mass_fraction", "residual"], rows, cfg)
    write_csv(out / "shoot_profiles.csv", ["index", "r", "phi", "dphi"], prows, cfg)
    print(f"wrote {out/'shoot_roots.csv'} ({len(rows)} roots)")
    return EXIT_OK


def _trace_both(cfg: RunConfig, keep_profiles: bool = True):
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    ths = cont.bifurcation_thresholds(model, params, domain)
    if not ths:
        raise RuntimeError("no bifurcation thresholds: kappa*lambda_1+delta >= max f'")
    basis = spec.SpectralBasis(domain, cfg.n_modes)
    pol = cont.StepPolicy(keep_profiles=keep_profiles, merge_tol=cfg.merge_tol)
    branches = []
    for direction in ("increasing", "decreasing"):
        branches.append(cont.trace_branch(model, params, domain, ths[0], direction,
                                          step_policy=pol, basis=basis))
    return ths, branches


def cmd_branch(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    ths, branches = _trace_both(cfg)
    rows = cont.export_diagram(branches)
    write_csv(out / "branch.csv", cont.DIAGRAM_COLUMNS, rows, cfg)
    prows = []
    for bid, branch in enumerate(branches):
        keep = np.unique(np.linspace(0, len(branch.profiles) - 1,
                                     min(25, len(branch.profiles))).astype(int))
        for k in keep:
            prof = branch.profiles[k]
            stride = max(1, domain.n_cells // 128)
            for j in range(0, prof.r.size, stride):
                prows.append({"branch_id": bid, "point": k, "phi0": prof.phi0,
                              "r": prof.r[j], "phi": prof.phi[j]})
    write_csv(out / "branch_profiles.csv",
              ["branch_id", "point", "phi0", "r", "phi"], prows, cfg)
    summary = {
        "thresholds": ths,
        "branches": [
            {"direction": b.points[-1].monotone_dir, "n_points": len(b.points),
             "termination": b.termination,
             "turning_points": [{"index": t.index, "phi0": t.phi0, "mass": t.mass}
                                for t in cont.turning_points(b)]}
            for b in branches
        ],
    }
    write_json(out / "branch_summary.json", summary, cfg)
    print(f"wrote {out/'branch.csv'} ({len(rows)} rows)")
    return EXIT_OK


def cmd_diagram(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    ths, branches = _trace_both(cfg, keep_profiles=False)
    folds = consts.fold_points(model, params, domain)
    pad = 0.1 * (folds.phi0_plus - folds.phi0_minus)
    grid = np.linspace(folds.phi0_minus - pad, folds.phi0_plus + pad, cfg.phi0_count)
    crows = cont.constant_diagram_rows(model, params, domain, grid)
    rows = cont.export_diagram(branches, crows)
    write_csv(out / "diagram.csv", cont.DIAGRAM_COLUMNS, rows, cfg)
    print(f"wrote {out/'diagram.csv'} ({len(rows)} rows)")
    return EXIT_OK


def _resolve_profile(cfg: RunConfig):
    """phi0 plus a direction selector -> profile (monotone root or constant)."""
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    if cfg.phi0 is None:
        raise ConfigError("this command requires phi0")
    sel = cfg.direction
    if sel.startswith("constant"):
        label = sel.split(":", 1)[1] if ":" in sel else "middle"
        sols = consts.constant_solutions(model, params, cfg.phi0, domain)
        match = [s for s in sols if s.branch_label == label]
        if not match:
            raise RuntimeError(f"no constant labeled {label!r} at phi0={cfg.phi0}")
        return shoot.constant_profile(model, params, cfg.phi0, match[0].phi,
                                      domain.dim, domain.n_cells)
    res = shoot.monotone_root(model, params, cfg.phi0, domain.dim, sel,
                              n_grid=domain.n_cells)
    if res is None:
        raise RuntimeError(f"no {sel} monotone solution found at phi0={cfg.phi0}")
    return res.profile


def cmd_spectrum(cfg: RunConfig) -> int:
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    out = _outdir(cfg)
    prof = _resolve_profile(cfg)
    basis = spec.SpectralBasis(domain, cfg.n_modes)
    report = spec.dynamical_spectrum(prof, params, model, basis)
    if model is Model.II:
        sa, indef = spec.selfadjoint_residual(prof, params, model, basis,
                                              seed=cfg.seed)
        report.self_adjoint_residual = sa
        report.indefinite_inner_form = indef
    lam, vmode = fnl.lambda_var_mode(prof, params, model, domain)
    report.kernel_residual = spec.kernel_check(prof, params, model, vmode, basis)
    payload = {
        "phi0": prof.phi0, "a": prof.a,
        "eigenvalues": report.eigenvalues[:64],
        "mu1": report.mu1,
        "dynamically_stable": bool(report.dynamically_stable),
        "self_adjoint_residual": report.self_adjoint_residual,
        "kernel_residual": report.kernel_residual,
    }
    write_json(out / "stability_report.json", payload, cfg)
    print(f"wrote {out/'stability_report.json'} (mu1={report.mu1:.6g})")
    return EXIT_OK


def cmd_lambda(cfg: RunConfig) -> int:
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    out = _outdir(cfg)
    prof = _resolve_profile(cfg)
    lam = fnl.lambda_var(prof, params, model, domain)
    payload = {"phi0": prof.phi0, "a": prof.a, "lambda_var": lam}
    if model is Model.II:
        payload["lambda1"] = fnl.lambda1(prof, params, model, domain)
    write_json(out / "lambda_report.json", payload, cfg)
    print(f"wrote {out/'lambda_report.json'} (Lambda={lam:.6g})")
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    model, params, domain = cfg.model, cfg.params(), cfg.domain()
    out = _outdir(cfg)
    if cfg.phi0 is None:
        raise ConfigError("evolve requires phi0")
    sols = consts.constant_solutions(model, params, cfg.phi0, domain)
    library = [ev.stationary_state_from_profile(
        shoot.constant_profile(model, params, cfg.phi0, s.phi, domain.dim,
                               domain.n_cells)) for s in sols]
    mono = shoot.monotone_roots(model, params, cfg.phi0, domain.dim,
                                n_grid=domain.n_cells)
    for res in mono.values():
        library.append(ev.stationary_state_from_profile(res.profile))

    if cfg.scenario == "perturbed_plateau":
        if not mono:
            raise RuntimeError(f"no plateau at phi0={cfg.phi0}")
        base = ev.stationary_state_from_profile(mono["increasing"].profile
                                                if "increasing" in mono
                                                else next(iter(mono.values())).profile)
    elif cfg.scenario == "perturbed_constant":
        mid = [s for s in sols if s.branch_label == "middle"] or sols
        base = ev.stationary_state_from_profile(
            shoot.constant_profile(model, params, cfg.phi0, mid[0].phi,
                                   domain.dim, domain.n_cells))
    elif cfg.scenario == "constant":
        base = library[0]
    else:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    base = ev.discrete_stationary(base, model, params, domain)
    pert = np.cos(np.pi * domain.r) * base.rho * (1.0 - base.rho)
    pert -= domain.integrate_fv(pert) / domain.volume
    rho0 = np.clip(base.rho + cfg.amplitude * pert, 1e-9, 1 - 1e-9)
    state = ev.State(rho=rho0, D=base.D.copy())
    policy = ev.DtPolicy(dt0=cfg.dt0)
    summary = ev.run(state, cfg.t_final, policy, model, params, domain,
                     stationary_library=library)
    payload = {
        "scenario": cfg.scenario,
        "times": summary.times,
        "mass_trace": summary.mass_trace,
        "functional_trace": summary.functional_trace,
        "distance_trace": summary.distance_trace,
        "terminal_distance": summary.terminal_distance,
        "matched_index": summary.matched_index,
        "rate": summary.rate,
    }
    write_json(out / "run_summary.json", payload, cfg)
    print(f"wrote {out/'run_summary.json'} (terminal distance "
          f"{summary.terminal_distance:.3g})")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = QUICK_CHECKS if cfg.quick else ALL_CHECKS
    ctx = VerificationContext(n_grid=cfg.n_grid)
    failed = 0
    for check in checks:
        res = check(ctx)
        print(res.line(), flush=True)
        failed += 0 if res.passed else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


COMMANDS = {
    "constants": cmd_constants,
    "shoot": cmd_shoot,
    "branch": cmd_branch,
    "spectrum": cmd_spectrum,
    "lambda": cmd_lambda,
    "evolve": cmd_evolve,
    "diagram": cmd_diagram,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdsteady",
        description="Radial stationary states and stability of two crowd-motion models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--model", default=None, choices=["I", "II"])
        p.add_argument("--dim", default=None, type=int, choices=[1, 2])
        p.add_argument("--kappa", default=None, type=float)
        p.add_argument("--delta", default=None, type=float)
        p.add_argument("--phi0", default=None, type=float)
        p.add_argument("--direction", default=None,
                       help="increasing | decreasing | constant[:label]")
        p.add_argument("--scenario", default=None)
        p.add_argument("--quick", action="store_true")
        p.add_argument("--n-grid", dest="n_grid", default=None, type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "model": args.model, "dim": args.dim, "kappa": args.kappa,
        "delta": args.delta, "phi0": args.phi0, "out_dir": args.out,
        "direction": args.direction, "scenario": args.scenario,
        "n_grid": args.n_grid,
    }
    if args.quick:
        overrides["quick"] = "true"
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:   # numerical failure surface
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

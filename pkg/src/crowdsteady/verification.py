"""Acceptance checks, shared by the test suite and the CLI verify command.

Each check returns a CheckResult; heavyweight inputs (traced branches) are
computed once in a VerificationContext and reused across checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import constants as consts
from . import continuation as cont
from . import evolution as ev
from . import functionals as fnl
from . import shooting as shoot
from . import spectrum as spec
from .collocation import collocation_solve
from .models import (
    Domain,
    Model,
    Params,
    disk_nonradial_lambda10,
    max_fprime,
    neumann_eigenvalue,
    rho_of_phi,
)

DEFAULT_PARAMS = {Model.I: Params(kappa=5e-4, delta=1e-3),
                  Model.II: Params(kappa=1e-2, delta=1e-3)}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name} ({self.seconds:.1f}s): {self.detail}"


def _timed(fn):
    def wrapper(*args, **kwargs) -> CheckResult:
        t0 = time.time()
        res = fn(*args, **kwargs)
        res.seconds = time.time() - t0
        return res
    return wrapper


@dataclass
class VerificationContext:
    """Shared heavyweight artifacts (branches, spectral bases)."""

    n_grid: int = 1024
    branches: dict = field(default_factory=dict)
    bases: dict = field(default_factory=dict)

    def domain(self, dim: int) -> Domain:
        return Domain(dim, self.n_grid)

    def basis(self, dim: int) -> spec.SpectralBasis:
        if dim not in self.bases:
            self.bases[dim] = spec.SpectralBasis(self.domain(dim), 128)
        return self.bases[dim]

    def branch(self, model: Model, dim: int, direction: str = "increasing",
               enrich: bool = True) -> cont.Branch:
        key = (model, dim, direction, enrich)
        if key not in self.branches:
            params = DEFAULT_PARAMS[model]
            domain = self.domain(dim)
            ths = cont.bifurcation_thresholds(model, params, domain)
            self.branches[key] = cont.trace_branch(
                model, params, domain, ths[0], direction,
                basis=self.basis(dim), enrich=enrich,
            )
        return self.branches[key]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

@_timed
def check_exact_constants(ctx: VerificationContext) -> CheckResult:
    """max f' values and Neumann eigenvalue constants."""
    errs = []
    errs.append(abs(max_fprime(Model.I) - 1.0 / (6.0 * math.sqrt(3.0))))
    errs.append(abs(max_fprime(Model.II) - 0.25))
    d1, d2 = Domain(1, 8), Domain(2, 8)
    lam1 = neumann_eigenvalue(d1, 1)
    lam01 = neumann_eigenvalue(d2, 1)
    lam10 = disk_nonradial_lambda10()
    ok = (max(errs) < 1e-10
          and abs(lam1 - 9.87) < 5e-3
          and abs(lam01 - 14.68) < 5e-3
          and abs(math.sqrt(lam01) - 3.83) < 5e-3
          and abs(lam10 - 3.39) < 5e-3
          and abs(math.sqrt(lam10) - 1.84) < 5e-3)
    return CheckResult(
        "exact-constants", ok,
        f"max-f' errors {max(errs):.1e}; lam1={lam1:.6f}, lam01={lam01:.6f}, "
        f"lam10={lam10:.6f}")


@_timed
def check_constant_classification(ctx: VerificationContext) -> CheckResult:
    """Root counts across a 2000-point phi0 sweep plus degenerate flags at folds."""
    model, params = Model.I, DEFAULT_PARAMS[Model.I]
    folds = consts.fold_points(model, params)
    pad = 0.1 * (folds.phi0_plus - folds.phi0_minus)
    sweep = np.linspace(folds.phi0_minus - pad, folds.phi0_plus + pad, 2000)
    bad = 0
    for phi0 in sweep:
        roots, _ = consts.k_roots(model, params, float(phi0))
        inside = folds.phi0_minus < phi0 < folds.phi0_plus
        near_fold = min(abs(phi0 - folds.phi0_minus), abs(phi0 - folds.phi0_plus)) < 1e-9
        if near_fold:
            continue
        if inside and len(roots) != 3:
            bad += 1
        if not inside and len(roots) != 1:
            bad += 1
    deg_minus = consts.constant_solutions(model, params, folds.phi0_minus)
    deg_plus = consts.constant_solutions(model, params, folds.phi0_plus)
    mid = 0.5 * (folds.phi0_minus + folds.phi0_plus)
    deg_mid = consts.constant_solutions(model, params, mid)
    flags_ok = (all(s.degenerate for s in deg_minus)
                and all(s.degenerate for s in deg_plus)
                and not any(s.degenerate for s in deg_mid))
    return CheckResult(
        "constant-classification", bad == 0 and flags_ok,
        f"sweep violations: {bad}/2000; degenerate flags at folds: {flags_ok}")


@_timed
def check_dispersion_equivalence(ctx: VerificationContext) -> CheckResult:
    """Negative dispersion root <=> kappa*lam1 + delta - rho(1-rho)h(rho) < 0."""
    rng = np.random.default_rng(42)
    cases = 0
    bad = 0
    for model in (Model.I, Model.II):
        for dim in (1, 2):
            domain = Domain(dim, 8)
            lam1 = neumann_eigenvalue(domain, 1)
            for _ in range(500):
                kappa = 10.0 ** rng.uniform(-4, -1)
                delta = 10.0 ** rng.uniform(-4, -0.5)
                rho = rng.uniform(1e-3, 1 - 1e-3)
                params = Params(kappa=kappa, delta=delta)
                h = 1.0 - 2.0 * rho if model is Model.I else 1.0
                crit = kappa * lam1 + delta - rho * (1 - rho) * h
                mn = consts.min_dispersion_real_part(model, params, domain, rho, n_max=80)
                cases += 1
                if (mn < 0) != (crit < 0):
                    bad += 1
    return CheckResult("dispersion-equivalence", bad == 0,
                       f"{cases} cases, {bad} counterexamples")


@_timed
def check_shooting_oracle(ctx: VerificationContext, per_combo: int = 5) -> CheckResult:
    """Plateau profiles agree with the Richardson collocation oracle to 1e-6."""
    worst_diff = 0.0
    worst_res = 0.0
    n_checked = 0
    details = []
    for model in (Model.I, Model.II):
        params = DEFAULT_PARAMS[model]
        for dim in (1, 2):
            domain = ctx.domain(dim)
            ths = cont.bifurcation_thresholds(model, params, domain)
            lo, hi = ths[0], ths[1]
            samples = np.linspace(lo + 0.08 * (hi - lo), hi - 0.08 * (hi - lo), per_combo)
            found = 0
            for phi0 in samples:
                for direction in ("increasing", "decreasing"):
                    shot = shoot.monotone_root(model, params, float(phi0), dim, direction,
                                               n_grid=domain.n_cells)
                    if shot is None:
                        continue
                    prof = shot.profile
                    res = shoot.bvp_residual(prof, model, params)
                    p_lo, p_hi = consts.extreme_phis(model, params, float(phi0))
                    enclosed = (prof.phi.min() >= p_lo - 1e-8
                                and prof.phi.max() <= p_hi + 1e-8)
                    oracle = collocation_solve(model, params, float(phi0), dim,
                                               prof.r, prof.phi)
                    diff = float(np.abs(oracle - prof.phi).max())
                    worst_diff = max(worst_diff, diff)
                    worst_res = max(worst_res, res)
                    n_checked += 1
                    found += 1
                    if not enclosed:
                        return CheckResult("shooting-oracle", False,
                                           f"enclosure violated at phi0={phi0}")
                    if found >= per_combo:
                        break
                if found >= per_combo:
                    break
            if found < per_combo:
                details.append(f"{model.value}-d{dim}: only {found} plateaus")
    ok = worst_diff < 1e-6 and worst_res < 1e-8 and not details
    return CheckResult(
        "shooting-oracle", ok,
        f"{n_checked} plateaus; worst oracle diff {worst_diff:.2e}, "
        f"worst residual {worst_res:.2e}" + ("; " + "; ".join(details) if details else ""))


@_timed
def check_branch_structure(ctx: VerificationContext) -> CheckResult:
    """Branches connect the thresholds; stability flips sit at the right spots."""
    msgs = []
    ok = True
    for model, dim in ((Model.I, 1), (Model.II, 1), (Model.I, 2), (Model.II, 2)):
        params = DEFAULT_PARAMS[model]
        domain = ctx.domain(dim)
        ths = cont.bifurcation_thresholds(model, params, domain)
        branch = ctx.branch(model, dim)
        pts = [p for p in branch.points if p.monotone_dir != "constant"]
        end_err = abs(branch.points[-1].phi0 - ths[1])
        connected = (branch.termination == "merged_with_constants"
                     and abs(branch.points[0].phi0 - ths[0]) < 1e-9
                     and end_err < 1e-4)
        folds = consts.fold_points(model, params, domain)
        inside = all(folds.phi0_minus < p.phi0 < folds.phi0_plus for p in pts)
        masses = np.array([p.mass for p in pts])
        mass_ok = (masses.min() > 0.0 and masses.max() < domain.volume
                   and masses.min() >= folds.mass_lower_bound - 1e-9
                   and masses.max() <= folds.mass_upper_bound + 1e-9)
        if not (connected and inside and mass_ok):
            ok = False
        msgs.append(f"{model.value}-d{dim}: end_err={end_err:.1e} inside={inside} "
                    f"mass_ok={mass_ok} term={branch.termination}")

        if dim == 1:
            tps = cont.turning_points(branch)
            mus = np.array([p.mu1 for p in pts])
            flips = [i for i in range(len(mus) - 1)
                     if np.sign(mus[i]) * np.sign(mus[i + 1]) < 0
                     and max(abs(mus[i]), abs(mus[i + 1])) > 1e-7]
            if tps:
                if len(flips) < 1:
                    ok = False
                    msgs.append(f"  {model.value}-d1: turning point but no mu1 flip")
                else:
                    gap = abs(flips[0] + 1 - tps[0].index)
                    if gap > 2:
                        ok = False
                    msgs.append(f"  {model.value}-d1: turning idx {tps[0].index}, "
                                f"mu1 flip idx {flips[0] + 1} (gap {gap})")
            else:
                # no mass turning point: stability must then hold on the whole
                # branch (the 'up to the turning point' clause is vacuous)
                all_stable = bool(np.all(mus > -1e-7))
                if not all_stable or flips:
                    ok = False
                msgs.append(f"  {model.value}-d1: no turning point; "
                            f"stable everywhere: {all_stable}")
            if model is Model.I:
                lams = np.array([p.lambda_var for p in pts])
                lflips = [i for i in range(len(lams) - 1)
                          if np.sign(lams[i]) * np.sign(lams[i + 1]) < 0]
                phis = np.array([p.phi0 for p in pts])
                if not lflips or not (phis[lflips[0]] < tps[0].phi0):
                    ok = False
                    msgs.append("  MI-d1: Lambda does not flip before the turning point")
                else:
                    msgs.append(f"  MI-d1: Lambda flips at phi0~{phis[lflips[0]]:.2f} "
                                f"< turning {tps[0].phi0:.2f}")
    return CheckResult("branch-structure", ok, " | ".join(msgs))


@_timed
def check_model2_stability_theory(ctx: VerificationContext) -> CheckResult:
    """Lambda1 <= Lambda, equality when < delta; sign(Lambda)=sign(mu1);
    self-adjointness at stable plateau points."""
    params = DEFAULT_PARAMS[Model.II]
    ok = True
    msgs = []
    worst_sa = 0.0
    for dim in (1, 2):
        domain = ctx.domain(dim)
        basis = ctx.basis(dim)
        branch = ctx.branch(Model.II, dim)
        pts = [p for p in branch.points if p.monotone_dir != "constant"]
        idxs = np.unique(np.linspace(1, len(pts) - 1, 12).astype(int))
        sign_bad = 0
        rel_bad = 0
        for i in idxs:
            p = pts[i]
            shot = shoot.monotone_root(Model.II, params, p.phi0, dim, p.monotone_dir,
                                       n_grid=domain.n_cells)
            if shot is None:
                continue
            prof = shot.profile
            lam = fnl.lambda_var(prof, params, Model.II, domain)
            lam1 = fnl.lambda1(prof, params, Model.II, domain)
            if lam1 > lam + 1e-10:
                ok = False
                msgs.append(f"d{dim} i={i}: Lambda1 > Lambda")
            # the equality criterion needs a STRICT inequality: Lambda1 == delta
            # (the (0, const) direction, resolved to eigensolver roundoff)
            # is the excluded boundary case; the 1e-8 absolute floor covers
            # dense-eigensolver roundoff where Lambda itself crosses zero
            strict = params.delta - 1e-9
            tol = max(1e-6 * max(abs(lam), abs(lam1)), 1e-8)
            if (lam < strict or lam1 < strict) and abs(lam1 - lam) > tol:
                rel_bad += 1
            mu1 = spec.dynamical_spectrum(prof, params, Model.II, basis).mu1
            if abs(lam) > 1e-7 and np.sign(lam) != np.sign(mu1):
                sign_bad += 1
            if mu1 > 0:
                sa, indef = spec.selfadjoint_residual(prof, params, Model.II, basis)
                worst_sa = max(worst_sa, sa)
        if sign_bad or rel_bad:
            ok = False
        msgs.append(f"d{dim}: sign mismatches {sign_bad}, "
                    f"Lambda=Lambda1 violations {rel_bad}")
    if worst_sa > 1e-8:
        ok = False
    msgs.append(f"worst self-adjoint residual {worst_sa:.2e}")
    return CheckResult("model2-stability-theory", ok, " | ".join(msgs))


@_timed
def check_lyapunov_energy_inequality(ctx: VerificationContext) -> CheckResult:
    """L >= E with equality only at rho = logistic(D - phi0).

    Tested in the phi0 = 0 gauge (mass chosen as the mass of logistic(D)),
    where the printed inequality is exact; the general-(D, M) form carries the
    -phi0*M correction and is covered by the unit tests.
    """
    model, params = Model.II, DEFAULT_PARAMS[Model.II]
    domain = ctx.domain(1)
    rng = np.random.default_rng(7)
    x = domain.r
    D = 2.0 * np.cos(np.pi * x) + 1.5 * np.cos(2 * np.pi * x) + 0.3
    mass = domain.integrate(rho_of_phi(D))          # phi0 = 0 gauge
    phi0 = fnl.phi0_of_mass(D, mass, domain)
    e_val = fnl.energy_E(model, params, phi0,
                         shoot.RadialProfile(r=x, phi=D - phi0,
                                             dphi=fnl.deriv4(D, domain.h),
                                             dim=1, phi0=phi0, a=float(D[0] - phi0)),
                         domain).value
    bad = 0
    min_gap = math.inf
    for _ in range(100):
        xi = rng.standard_normal(6)
        pert = sum(xi[k] * np.cos((k + 1) * np.pi * x) * 0.5 for k in range(6))
        shift_lo, shift_hi = -40.0, 40.0
        target = mass

        def mass_of(c):
            return domain.integrate(rho_of_phi(D - phi0 + pert - c))

        from scipy.optimize import brentq
        c = brentq(lambda s: mass_of(s) - target, shift_lo, shift_hi, xtol=1e-14)
        rho = np.asarray(rho_of_phi(D - phi0 + pert - c))
        L = fnl.lyapunov(model, params, rho, D, domain)
        gap = L - e_val
        min_gap = min(min_gap, gap)
        if gap < 1e-10:
            bad += 1
    rho_star = np.asarray(rho_of_phi(D - phi0))
    L_star = fnl.lyapunov(model, params, rho_star, D, domain)
    eq_gap = abs(L_star - e_val)
    ok = bad == 0 and eq_gap <= 1e-10
    return CheckResult(
        "lyapunov-ge-energy", ok,
        f"min gap over 100 random rho: {min_gap:.3e}; equality gap at the "
        f"logistic density: {eq_gap:.2e}")


@_timed
def check_evolution(ctx: VerificationContext) -> CheckResult:
    """Mass conservation, Lyapunov decay, growth-rate match, plateau return,
    linearized conservation and exponential bound."""
    model, params = Model.II, DEFAULT_PARAMS[Model.II]
    domain = ctx.domain(1)
    basis = ctx.basis(1)
    msgs = []
    ok = True

    # (a)+(b): 1e4 fixed steps from a perturbed stable plateau
    branch = ctx.branch(Model.II, 1)
    pts = [p for p in branch.points if p.monotone_dir != "constant"]
    stable = [p for p in pts if p.mu1 > 5e-4]
    p_star = stable[len(stable) // 2]
    shot = shoot.monotone_root(model, params, p_star.phi0, 1, p_star.monotone_dir,
                               n_grid=domain.n_cells)
    prof = shot.profile
    st_lib = ev.stationary_state_from_profile(prof)
    st_hat = ev.discrete_stationary(st_lib, model, params, domain)
    pert = np.cos(np.pi * domain.r) * st_hat.rho * (1 - st_hat.rho)
    pert -= domain.integrate_fv(pert) / domain.volume
    amp0 = 1e-3 / np.abs(pert).max()
    state = ev.State(rho=st_hat.rho + amp0 * pert, D=st_hat.D.copy())
    mass0 = domain.integrate_fv(state.rho)
    lya_prev = fnl.lyapunov(model, params, state.rho, state.D, domain)
    lya_ok = True
    s = state.copy()
    for i in range(10000):
        s = ev.step(s, 1e-4, model, params, domain)
        if (i + 1) % 100 == 0:
            lya = fnl.lyapunov(model, params, s.rho, s.D, domain)
            if lya > lya_prev + 1e-10:
                lya_ok = False
            lya_prev = lya
    drift = abs(domain.integrate_fv(s.rho) - mass0) / mass0
    if drift > 1e-8 or not lya_ok:
        ok = False
    msgs.append(f"mass drift {drift:.1e}, Lyapunov non-increasing: {lya_ok}")

    # (d): continue until the perturbed plateau returns to 1e-4
    dist = float(np.abs(s.rho - st_hat.rho).max())
    t_now = s.t
    while dist > 1e-4 and t_now < 400.0:
        s = ev.step(s, 5e-3, model, params, domain)
        t_now = s.t
        dist = float(np.abs(s.rho - st_hat.rho).max())
    if dist > 1e-4:
        ok = False
    msgs.append(f"plateau return distance {dist:.2e} at t={t_now:.0f}")

    # (c): growth rate of a perturbed unstable constant vs |mu1|
    interval = consts.instability_interval(model, params, domain)
    phi_c = 0.35 * interval.phi_interval[0] + 0.65 * interval.phi_interval[1]
    phi0_c = float(consts.k_of(model, params, phi_c))
    prof_c = shoot.constant_profile(model, params, phi0_c, phi_c, 1, domain.n_cells)
    rep = spec.dynamical_spectrum(prof_c, params, model, basis)
    mu1 = rep.mu1
    st_c = ev.discrete_stationary(ev.stationary_state_from_profile(prof_c),
                                  model, params, domain)
    pert = np.cos(np.pi * domain.r)
    pert -= domain.integrate_fv(pert) / domain.volume
    state = ev.State(rho=st_c.rho + 1e-7 * pert, D=st_c.D.copy())
    dt = 2e-3
    ts, ds = [], []
    s = state.copy()
    while np.abs(s.rho - st_c.rho).max() < 3e-4 and s.t < 400:
        s = ev.step(s, dt, model, params, domain)
        ts.append(s.t)
        ds.append(np.abs(s.rho - st_c.rho).max())
    ts, ds = np.array(ts), np.array(ds)
    sel = (ds > 10 * ds[0]) & (ds < 1e-4)
    rate = float(np.polyfit(ts[sel], np.log(ds[sel]), 1)[0])
    rate_err = abs(rate - abs(mu1)) / abs(mu1)
    if rate_err > 0.05:
        ok = False
    msgs.append(f"growth rate {rate:.5f} vs |mu1| {abs(mu1):.5f} (rel {rate_err:.2%})")

    # (e): linearized conservation and the exponential-growth bound.
    # No Model II plateau is variationally unstable in the studied regimes
    # (branches are stable throughout), so the Lambda < 0 case is exercised
    # at an unstable constant. There the Lambda-minimizer has multiplier
    # mu = 0, making the initial decay rate of L_D exactly 2|Lambda|, while
    # the asymptotic rate is 2|mu1| < 2|Lambda| (exact dispersion): the
    # literal all-t bound cannot hold, so the check asserts the provable
    # instantaneous form plus the test-function inequality I_D/L_D <= Lambda.
    lam, vmin = fnl.lambda_var_mode(prof_c, params, model, domain)
    g = fnl.g_weight(prof_c)
    pair0 = fnl.PairField(u=g * vmin, v=vmin.copy())
    ratio = fnl.quad_ID(prof_c, params, pair0, domain) / \
        fnl.quad_LD(prof_c, params, pair0, domain)
    ratio_ok = ratio <= lam + 1e-8
    T_e = 0.02
    summ = ev.linearized_evolve(prof_c, pair0, T_e, params, model, domain,
                                dt=1e-4, n_samples=20)
    u_cons = float(np.abs(summ.int_u_trace).max())
    logM = np.log(-summ.quad_LD_trace)
    rate0 = float((logM[1] - logM[0]) / (summ.times[1] - summ.times[0]))
    rate_ok = rate0 >= 2.0 * abs(lam) * (1.0 - 1e-3)
    bound = summ.quad_LD_trace[0] * np.exp(2 * abs(lam) * summ.times)
    window_ok = bool(np.all(summ.quad_LD_trace <= bound * (1.0 - 2e-3) + 1e-14))
    if u_cons > 1e-10 or not (ratio_ok and rate_ok and window_ok):
        ok = False
    msgs.append(
        f"int-u conservation {u_cons:.1e}; I_D/L_D <= Lambda: {ratio_ok}; "
        f"initial L_D rate {rate0:.5f} vs 2|Lambda| {2 * abs(lam):.5f}; "
        f"bound on [0, {T_e}]: {window_ok}")
    return CheckResult("evolution-cross-check", ok, " | ".join(msgs))


@_timed
def check_coexistence(ctx: VerificationContext) -> CheckResult:
    """A mass with both a dynamically stable constant and a stable plateau (MI d=1)."""
    model, params = Model.I, DEFAULT_PARAMS[Model.I]
    domain = ctx.domain(1)
    branch = ctx.branch(Model.I, 1)
    pts = [p for p in branch.points if p.monotone_dir != "constant"]
    interval = consts.instability_interval(model, params, domain)
    m_lo, m_hi = interval.mass_interval
    hits = []
    for p in pts:
        if p.mu1 <= 0:
            continue
        if m_lo < p.mass < m_hi:
            continue
        rho_c = p.mass / domain.volume
        mu_const = consts.min_dispersion_real_part(model, params, domain, rho_c)
        if mu_const > 0:
            hits.append((p.mass, p.mu1, mu_const))
    ok = len(hits) > 0
    detail = (f"{len(hits)} masses with both states stable; example mass "
              f"{hits[0][0]:.6f} (plateau mu1 {hits[0][1]:.2e}, constant mu1 "
              f"{hits[0][2]:.2e})" if hits else "no coexistence found")
    return CheckResult("coexistence-of-stable-states", ok, detail)


ALL_CHECKS = [
    check_exact_constants,
    check_constant_classification,
    check_dispersion_equivalence,
    check_shooting_oracle,
    check_branch_structure,
    check_model2_stability_theory,
    check_lyapunov_energy_inequality,
    check_evolution,
    check_coexistence,
]

QUICK_CHECKS = [
    check_exact_constants,
    check_constant_classification,
    check_dispersion_equivalence,
    check_lyapunov_energy_inequality,
]


def run_checks(quick: bool = False, n_grid: int = 1024) -> list[CheckResult]:
    ctx = VerificationContext(n_grid=n_grid)
    checks = QUICK_CHECKS if quick else ALL_CHECKS
    return [c(ctx) for c in checks]

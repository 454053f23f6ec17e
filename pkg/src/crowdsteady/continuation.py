"""Branch tracing for monotone plateau solutions.

The non-constant branch bifurcates from the middle constant branch at the two
phi0 values where kappa*lambda_1 + delta = f'(phi). Tracing walks phi0 from
one threshold to the other and computes the requested monotone solution at
each step:

* d=1: the stationary equation is a conservative oscillator, so the monotone
  roots are the first slope crossings on geometric ladders anchored at the
  exact turning levels of the limiting-barrier orbit (they accumulate there
  exponentially; uniform scans and plain secant continuation lose them in
  double precision mid-branch).
* d=2: secant prediction in a with a local expanding bracket around it.

Every accepted point must be a strictly monotone profile; failures halve the
phi0 step, and the branch endpoint is bisected so it lands on the far
threshold to high accuracy. Accepted points are enriched with mass, energy,
the variational index Lambda and the constrained dynamical eigenvalue mu1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import constants as consts
from . import functionals as fnl
from .models import (
    Domain,
    Model,
    Params,
    eval_F,
    eval_fprime,
    k_of,
    max_fprime,
    neumann_eigenvalue,
)
from .shooting import (
    RadialProfile,
    ShootResult,
    hamiltonian_turning_levels,
    integrate_shoot,
    is_monotone,
    mass_of_profile,
    monotone_root,
    terminal_slope,
)
from .spectrum import SpectralBasis, dynamical_spectrum


@dataclass
class BranchPoint:
    phi0: float
    a: float
    mass: float
    energy: float
    lambda_var: float
    mu1: float
    monotone_dir: str


@dataclass
class Branch:
    model: Model
    params: Params
    dim: int
    origin_phi0: float
    points: list[BranchPoint] = field(default_factory=list)
    termination: str = "incomplete"   # merged_with_constants | domain_exit | step_failure
    profiles: list[RadialProfile] = field(default_factory=list)


@dataclass
class StepPolicy:
    initial_frac: float = 1e-3        # first step, as a fraction of the threshold gap
    max_frac: float = 1.5e-2          # step cap, same units
    growth: float = 1.4
    max_halvings: int = 40
    merge_tol: float = 1e-7
    seed_amp_frac: float = 1e-3       # epsilon = frac * (phi_+ - phi_-) for d=2 seeding
    max_points: int = 4000
    endpoint_tol: float = 1e-6        # phi0 resolution of the branch endpoint
    keep_profiles: bool = False


@dataclass
class TurningPoint:
    index: int
    phi0: float
    mass: float


def bifurcation_thresholds(model: Model, params: Params, domain: Domain) -> list[float]:
    """phi0 values where the first Neumann mode destabilizes the middle branch."""
    thr = params.kappa * neumann_eigenvalue(domain, 1) + params.delta
    if thr >= max_fprime(model):
        return []
    phi_lo, phi_hi = consts._solve_fprime_equals(model, thr)
    return sorted([float(k_of(model, params, phi_lo)), float(k_of(model, params, phi_hi))])


def _guard(lo: float, hi: float) -> float:
    return max(1e3, 4.0 * (abs(lo) + abs(hi)) + 100.0)




def _root_d2_local(model, params, phi0, dim, direction, a_pred, width, n_grid,
                   max_expand: int = 8) -> ShootResult | None:
    roots, _ = consts.k_roots(model, params, phi0)
    if len(roots) < 3:
        return None
    guard = _guard(roots[0], roots[-1])
    cache: dict[float, float] = {}

    def s(a: float) -> float:
        if a not in cache:
            cache[a] = terminal_slope(model, params, phi0, a, dim, guard=guard)
        return cache[a]

    w = width
    for _ in range(max_expand):
        lo, hi = a_pred - w, a_pred + w
        s_lo, s_mid, s_hi = s(lo), s(a_pred), s(hi)
        if not all(map(math.isfinite, (s_lo, s_mid, s_hi))):
            return None
        if s_lo * s_mid < 0:
            bracket = (lo, a_pred)
        elif s_mid * s_hi < 0:
            bracket = (a_pred, hi)
        else:
            w *= 2.0
            continue
        root = brentq(s, *bracket, xtol=1e-15, rtol=8.9e-16)
        if any(abs(root - c) < 1e-11 * max(1.0, abs(c)) for c in roots):
            return None
        shot = integrate_shoot(model, params, phi0, root, dim, n_grid=n_grid, guard=guard)
        if shot.profile is not None and is_monotone(shot.profile) == direction:
            return shot
        return None
    return None


def _seed_d2(model, params, phi0, dim, direction, eps, n_grid) -> ShootResult | None:
    """First point just inside the interval: probe outward from the middle constant.

    Slopes use the tight profile tolerance: near the thresholds the d=2
    bifurcation is transcritical (amplitude linear in phi0), and the slope
    signal between the merging roots drops below the fast-integrator noise.
    """
    roots, _ = consts.k_roots(model, params, phi0)
    if len(roots) < 3:
        return None
    a_m = roots[1]
    guard = _guard(roots[0], roots[-1])
    side = -1.0 if direction == "increasing" else 1.0

    def s(a: float) -> float:
        return terminal_slope(model, params, phi0, a, dim, ode_tol=1e-12, guard=guard)

    offsets = eps * np.geomspace(1e-5, 4096.0, 45)
    a_prev = a_m + side * offsets[0] * 0.5
    s_prev = s(a_prev)
    for off in offsets:
        a_try = a_m + side * off
        s_try = s(a_try)
        if math.isfinite(s_prev) and math.isfinite(s_try) and s_prev * s_try < 0:
            root = brentq(s, min(a_prev, a_try), max(a_prev, a_try),
                          xtol=1e-15, rtol=8.9e-16)
            shot = integrate_shoot(model, params, phi0, root, dim, n_grid=n_grid,
                                   guard=guard)
            if shot.profile is not None and is_monotone(shot.profile) == direction:
                return shot
        a_prev, s_prev = a_try, s_try
    return None


def trace_branch(
    model: Model,
    params: Params,
    domain: Domain,
    origin_phi0: float,
    direction: str,
    step_policy: StepPolicy | None = None,
    basis: SpectralBasis | None = None,
    checkpoints: list[float] | None = None,
    enrich: bool = True,
) -> Branch:
    """Trace the plateau branch from one bifurcation threshold to the other.

    ``direction`` is the monotonicity ('increasing' or 'decreasing') of the
    traced profiles; ``checkpoints`` force the continuation to land exactly on
    given phi0 values (step-robustness tests compare matched points).
    """
    if direction not in ("increasing", "decreasing"):
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    pol = step_policy or StepPolicy()
    thresholds = bifurcation_thresholds(model, params, domain)
    if not thresholds:
        raise RuntimeError("no bifurcation thresholds for these parameters")
    others = [t for t in thresholds if abs(t - origin_phi0) > 1e-9]
    if len(others) != 1:
        raise ValueError(f"origin_phi0={origin_phi0} is not one of {thresholds}")
    target = others[0]
    span = abs(target - origin_phi0)
    sgn = 1.0 if target > origin_phi0 else -1.0
    ckpts = sorted(checkpoints or [], key=lambda c: sgn * c)
    if basis is None and enrich:
        basis = SpectralBasis(domain)

    branch = Branch(model=model, params=params, dim=domain.dim, origin_phi0=origin_phi0)

    def accept(shot: ShootResult, label: str = direction):
        branch.points.append(_make_point(model, params, domain, basis, shot,
                                         label, enrich))
        if pol.keep_profiles:
            branch.profiles.append(shot.profile)

    # branch origin: the constant on the middle branch at the threshold
    roots0, _ = consts.k_roots(model, params, origin_phi0 + sgn * 1e-7 * span)
    from .shooting import constant_profile
    const_prof = constant_profile(model, params, origin_phi0, roots0[1], domain.dim,
                                  domain.n_cells)
    accept(ShootResult(profile=const_prof, terminal_slope=0.0, converged=True),
           label="constant")

    lo0, hi0 = consts.extreme_phis(model, params, origin_phi0 + sgn * 0.01 * span)
    eps = pol.seed_amp_frac * (hi0 - lo0)

    hint: float | None = None

    def corrector(phi0: float, a_pred: float | None, width: float | None) -> ShootResult | None:
        nonlocal hint
        if domain.dim == 1:
            shot = monotone_root(model, params, phi0, 1, direction,
                                 n_grid=domain.n_cells, hint_offset=hint)
            if shot is not None:
                levels = hamiltonian_turning_levels(model, params, phi0)
                if levels is not None:
                    anchor = levels[0] if direction == "increasing" else levels[1]
                    hint = abs(shot.profile.a - anchor)
            return shot
        if a_pred is None:
            return _seed_d2(model, params, phi0, 2, direction, eps, domain.n_cells)
        return _root_d2_local(model, params, phi0, 2, direction, a_pred, width,
                              domain.n_cells)

    # first non-constant point
    step = pol.initial_frac * span
    first = None
    for _ in range(pol.max_halvings):
        phi0_try = origin_phi0 + sgn * step
        first = corrector(phi0_try, None, None)
        if first is not None:
            break
        step /= 2.0
    if first is None:
        branch.termination = "step_failure"
        return branch
    accept(first)
    a_k, phi0_k = first.profile.a, phi0_try
    a_km1, phi0_km1 = roots0[1], origin_phi0

    step *= pol.growth
    ck_iter = iter(ckpts)
    next_ck = _next_checkpoint(ck_iter, phi0_k, sgn)
    fail_streak = 0

    while len(branch.points) < pol.max_points:
        remaining = sgn * (target - phi0_k)
        if remaining <= pol.endpoint_tol:
            branch.termination = "merged_with_constants"
            break
        dphi0 = min(step, pol.max_frac * span, max(remaining - pol.endpoint_tol / 2,
                                                   pol.endpoint_tol / 2))
        phi0_new = phi0_k + sgn * dphi0
        clamped = False
        if next_ck is not None and sgn * (phi0_new - next_ck) >= 0.0:
            phi0_new = next_ck
            dphi0 = abs(phi0_new - phi0_k)
            clamped = True

        if domain.dim == 1:
            shot = corrector(phi0_new, None, None)
        else:
            t_frac = (phi0_new - phi0_k) / (phi0_k - phi0_km1) if phi0_k != phi0_km1 else 1.0
            a_pred = a_k + (a_k - a_km1) * t_frac
            width = max(abs(a_k - a_km1) * max(abs(t_frac), 1.0) * 0.75,
                        1e-7 * (1.0 + abs(a_pred)))
            shot = corrector(phi0_new, a_pred, width)

        if shot is None and domain.dim == 2:
            # small-amplitude fallback: probe outward from the middle constant
            shot = corrector(phi0_new, None, None)
        if shot is None:
            fail_streak += 1
            step = dphi0 / 2.0
            if step < pol.endpoint_tol * max(span, 1.0) * 1e-3 or fail_streak > pol.max_halvings:
                branch.termination = _bisect_endpoint(
                    branch, corrector, accept, phi0_k, phi0_new, sgn, pol, target, span)
                break
            continue

        fail_streak = 0
        accept(shot)
        amp = _amplitude(model, params, shot.profile)
        a_km1, phi0_km1 = a_k, phi0_k
        a_k, phi0_k = shot.profile.a, phi0_new
        if amp < pol.merge_tol:
            branch.termination = "merged_with_constants"
            break
        if clamped:
            next_ck = _next_checkpoint(ck_iter, phi0_k, sgn)
        if dphi0 >= step * 0.999:
            step = dphi0 * pol.growth
    else:
        branch.termination = "step_failure"

    if branch.termination == "incomplete":
        branch.termination = "merged_with_constants"
    return branch


def _amplitude(model, params, profile: RadialProfile) -> float:
    """Sup distance of the profile to the nearest constant solution."""
    roots, _ = consts.k_roots(model, params, profile.phi0)
    return min(float(np.abs(profile.phi - c).max()) for c in roots)


def _bisect_endpoint(branch, corrector, accept, phi0_good, phi0_bad, sgn, pol,
                     target, span) -> str:
    """Resolve the phi0 where the branch ceases to exist."""
    for _ in range(60):
        if abs(phi0_bad - phi0_good) < pol.endpoint_tol:
            break
        mid = 0.5 * (phi0_good + phi0_bad)
        shot = corrector(mid, None, None)
        if shot is not None:
            accept(shot)
            phi0_good = mid
        else:
            phi0_bad = mid
    if abs(phi0_good - target) < max(1e-3 * span, 100 * pol.endpoint_tol):
        return "merged_with_constants"
    return "step_failure"


def _next_checkpoint(ck_iter, phi0_now: float, sgn: float):
    for c in ck_iter:
        if sgn * (c - phi0_now) > 0:
            return c
    return None


def _make_point(model, params, domain, basis, shot: ShootResult,
                direction: str, enrich: bool) -> BranchPoint:
    prof = shot.profile
    mass, _ = mass_of_profile(prof, domain)
    if enrich:
        energy = fnl.energy_E(model, params, prof.phi0, prof, domain).value
        lam = fnl.lambda_var(prof, params, model, domain)
        mu1 = dynamical_spectrum(prof, params, model, basis).mu1
    else:
        energy = lam = mu1 = math.nan
    return BranchPoint(phi0=prof.phi0, a=prof.a, mass=mass, energy=energy,
                       lambda_var=lam, mu1=mu1, monotone_dir=direction)


def turning_points(branch: Branch) -> list[TurningPoint]:
    """Sign changes of dM/dphi0 along the branch, refined by a quadratic fit."""
    pts = [p for p in branch.points if p.monotone_dir != "constant"]
    if len(pts) < 3:
        return []
    phi0 = np.array([p.phi0 for p in pts])
    mass = np.array([p.mass for p in pts])
    dm = np.diff(mass) / np.diff(phi0)
    out: list[TurningPoint] = []
    for i in range(len(dm) - 1):
        if dm[i] == 0.0 or dm[i] * dm[i + 1] >= 0.0:
            continue
        j = i + 1                       # interior node where the slope flips
        sel = slice(max(0, j - 1), min(len(pts), j + 2))
        coef = np.polyfit(phi0[sel], mass[sel], 2)
        if coef[0] != 0.0:
            p_star = -coef[1] / (2.0 * coef[0])
            m_star = float(np.polyval(coef, p_star))
        else:
            p_star, m_star = phi0[j], mass[j]
        out.append(TurningPoint(index=j, phi0=float(p_star), mass=m_star))
    return out


DIAGRAM_COLUMNS = [
    "model", "dim", "kappa", "delta", "phi0", "a", "mass", "mass_fraction",
    "energy", "lambda_var", "mu1", "branch_id", "monotone_dir",
    "stable_dyn", "stable_var",
]


def export_diagram(
    branches: list[Branch],
    constant_rows: list[dict] | None = None,
) -> list[dict]:
    """Flatten branches (plus optional precomputed constant rows) to table rows."""
    rows: list[dict] = []
    for bid, branch in enumerate(branches):
        vol = 1.0 if branch.dim == 1 else math.pi
        for p in branch.points:
            rows.append({
                "model": branch.model.value,
                "dim": branch.dim,
                "kappa": branch.params.kappa,
                "delta": branch.params.delta,
                "phi0": p.phi0,
                "a": p.a,
                "mass": p.mass,
                "mass_fraction": p.mass / vol,
                "energy": p.energy,
                "lambda_var": p.lambda_var,
                "mu1": p.mu1,
                "branch_id": f"branch-{bid}-{p.monotone_dir}",
                "monotone_dir": p.monotone_dir,
                "stable_dyn": int(p.mu1 > 0.0) if math.isfinite(p.mu1) else -1,
                "stable_var": int(p.lambda_var > 0.0) if math.isfinite(p.lambda_var) else -1,
            })
    rows.extend(constant_rows or [])
    return rows


def constant_diagram_rows(
    model: Model, params: Params, domain: Domain, phi0_grid: np.ndarray,
) -> list[dict]:
    """Diagram rows for all constant solutions over a phi0 grid."""
    rows = []
    lam1 = neumann_eigenvalue(domain, 1)
    for phi0 in phi0_grid:
        for sol in consts.constant_solutions(model, params, float(phi0), domain):
            fp = float(eval_fprime(model, sol.phi))
            lam = params.kappa * lam1 + params.delta - fp
            mu1 = consts.min_dispersion_real_part(model, params, domain, sol.rho)
            rows.append({
                "model": model.value,
                "dim": domain.dim,
                "kappa": params.kappa,
                "delta": params.delta,
                "phi0": sol.phi0,
                "a": sol.phi,
                "mass": sol.mass,
                "mass_fraction": sol.mass / domain.volume,
                "energy": (params.delta / 2.0 * (sol.phi + sol.phi0) ** 2
                           - float(eval_F(model, sol.phi))) * domain.volume,
                "lambda_var": lam,
                "mu1": mu1,
                "branch_id": f"const-{sol.branch_label}",
                "monotone_dir": "constant",
                "stable_dyn": int(mu1 > 0.0),
                "stable_var": int(lam > 0.0),
            })
    return rows

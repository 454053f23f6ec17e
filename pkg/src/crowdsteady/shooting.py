"""Shooting solver for the radial stationary problem.

For fixed phi0 every radial stationary solution is the trajectory of

    kappa * (phi'' + (d-1)/r * phi') = delta*(phi + phi0) - f(phi),
    phi(0) = a, phi'(0) = 0,

for some center value a, and it is a solution of the boundary-value problem
iff phi'(1) = 0. All solutions take values between the extreme constant
solutions phi_-(phi0) and phi_+(phi0), so scanning a over that interval and
bracketing sign changes of the terminal slope finds every radial solution.

The scan uses a vectorized fixed-step RK4 sweep over all a values at once
(cheap, and trivially concurrent); each bracket is then refined with an
adaptive high-accuracy integrator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import constants as consts
from .grids import deriv6
from .models import Domain, Model, Params, eval_F, eval_f, rho_of_phi

R_START = 1e-6          # Taylor-start radius; next correction is O(r^4)
SLOPE_TOL = 1e-10
RESIDUAL_TOL = 1e-8
DEFAULT_SCAN_CELLS = 2000
DEFAULT_N_GRID = 1024
ODE_RTOL = 1e-10          # slope evaluations (root finding)
ODE_ATOL = 1e-12
PROFILE_RTOL = 1e-12      # stored profiles: tail errors amplify exponentially


@dataclass
class RadialProfile:
    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    dim: int
    phi0: float
    a: float

    @property
    def n_cells(self) -> int:
        return self.r.size - 1


@dataclass
class ShootResult:
    profile: RadialProfile | None
    terminal_slope: float
    converged: bool
    diverged: bool = False


def _taylor_start(model: Model, params: Params, phi0: float, a: float, dim: int):
    c = (params.delta * (a + phi0) - float(eval_f(model, a))) / (2.0 * dim * params.kappa)
    return a + c * R_START**2, 2.0 * c * R_START


def _blowup_guard(model: Model, params: Params, phi0: float) -> float:
    lo, hi = consts.extreme_phis(model, params, phi0)
    return max(1e3, 4.0 * (abs(lo) + abs(hi)) + 100.0)


def integrate_shoot(
    model: Model,
    params: Params,
    phi0: float,
    a: float,
    dim: int,
    ode_tol: float = PROFILE_RTOL,
    n_grid: int = DEFAULT_N_GRID,
    slope_tol: float = SLOPE_TOL,
    guard: float | None = None,
) -> ShootResult:
    """Integrate one shot from phi(0)=a and resample onto the uniform grid."""
    kappa, delta = params.kappa, params.delta
    if guard is None:
        guard = _blowup_guard(model, params, phi0)

    def rhs(r, y):
        phi, dphi = y
        lap = (delta * (phi + phi0) - eval_f(model, phi)) / kappa
        if dim > 1:
            return (dphi, lap - (dim - 1) * dphi / r)
        return (dphi, lap)

    def blowup(r, y):
        return abs(y[0]) - guard

    blowup.terminal = True

    y0 = _taylor_start(model, params, phi0, a, dim)
    # max_step keeps the dense-output interpolation error below the 1e-8
    # residual budget; slope-only evaluations skip it for speed
    sol = solve_ivp(
        rhs, (R_START, 1.0), y0, method="RK45", rtol=ode_tol,
        atol=min(ODE_ATOL, 1e-2 * ode_tol), dense_output=True, events=blowup,
        max_step=2.0 / n_grid,
    )
    if sol.status == 1 or not sol.success:
        return ShootResult(profile=None, terminal_slope=np.nan, converged=False, diverged=True)

    r = np.linspace(0.0, 1.0, n_grid + 1)
    vals = sol.sol(np.clip(r, R_START, 1.0))
    phi, dphi = vals[0].copy(), vals[1].copy()
    phi[0], dphi[0] = a, 0.0
    slope = float(sol.y[1, -1])
    prof = RadialProfile(r=r, phi=phi, dphi=dphi, dim=dim, phi0=phi0, a=a)
    return ShootResult(profile=prof, terminal_slope=slope, converged=abs(slope) <= slope_tol)


def terminal_slope(
    model: Model, params: Params, phi0: float, a: float, dim: int,
    ode_tol: float = ODE_RTOL, guard: float | None = None,
) -> float:
    """phi'(1) of the shot from a (nan if the trajectory blows up)."""
    kappa, delta = params.kappa, params.delta
    if guard is None:
        guard = _blowup_guard(model, params, phi0)

    def rhs(r, y):
        phi, dphi = y
        lap = (delta * (phi + phi0) - eval_f(model, phi)) / kappa
        if dim > 1:
            return (dphi, lap - (dim - 1) * dphi / r)
        return (dphi, lap)

    def blowup(r, y):
        return abs(y[0]) - guard

    blowup.terminal = True
    sol = solve_ivp(rhs, (R_START, 1.0), _taylor_start(model, params, phi0, a, dim),
                    method="RK45", rtol=ode_tol, atol=ODE_ATOL, events=blowup)
    if sol.status == 1 or not sol.success:
        return float("nan")
    return float(sol.y[1, -1])


def scan_slopes(
    model: Model, params: Params, phi0: float, avals: np.ndarray, dim: int,
    n_steps: int = 4096, guard: float | None = None,
) -> np.ndarray:
    """Terminal slopes for a whole batch of center values at once.

    Fixed-step RK4, vectorized over a; accuracy ~1e-8, plenty for bracketing.
    Diverged trajectories come back as nan.
    """
    kappa, delta = params.kappa, params.delta
    if guard is None:
        guard = _blowup_guard(model, params, phi0)
    a = np.asarray(avals, dtype=float)
    c = (delta * (a + phi0) - eval_f(model, a)) / (2.0 * dim * kappa)
    phi = a + c * R_START**2
    dphi = 2.0 * c * R_START
    alive = np.ones(a.shape, dtype=bool)
    h = (1.0 - R_START) / n_steps

    def f_rhs(r, p, dp):
        lap = (delta * (p + phi0) - eval_f(model, p)) / kappa
        if dim > 1:
            return dp, lap - (dim - 1) * dp / r
        return dp, lap

    r = R_START
    for _ in range(n_steps):
        k1p, k1d = f_rhs(r, phi, dphi)
        k2p, k2d = f_rhs(r + h / 2, phi + h / 2 * k1p, dphi + h / 2 * k1d)
        k3p, k3d = f_rhs(r + h / 2, phi + h / 2 * k2p, dphi + h / 2 * k2d)
        k4p, k4d = f_rhs(r + h, phi + h * k3p, dphi + h * k3d)
        phi = phi + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        dphi = dphi + h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        r += h
        bad = ~np.isfinite(phi) | (np.abs(phi) > guard)
        if bad.any():
            alive &= ~bad
            phi = np.where(bad, 0.0, phi)
            dphi = np.where(bad, 0.0, dphi)
    return np.where(alive, dphi, np.nan)


def _polish_root(model, params, phi0, a, dim, guard, max_iter: int = 4) -> float:
    """Secant-polish a slope root with tight integrator tolerance.

    Roots located with the fast slope evaluations inherit their integration
    noise; along saddle-hugging orbits the profile tail amplifies it by
    d phi(1)/d a ~ 1e4, so the final root must be pinned with the same
    tolerance used for stored profiles.
    """
    def s(x):
        return terminal_slope(model, params, phi0, x, dim, PROFILE_RTOL, guard)

    a1 = a
    s1 = s(a1)
    a2 = a1 + 1e-11 * max(1.0, abs(a1))
    s2 = s(a2)
    best_a, best_s = (a1, abs(s1)) if abs(s1) < abs(s2) else (a2, abs(s2))
    for _ in range(max_iter):
        if s2 == s1 or not (math.isfinite(s1) and math.isfinite(s2)):
            break
        a3 = a2 - s2 * (a2 - a1) / (s2 - s1)
        s3 = s(a3)
        a1, s1, a2, s2 = a2, s2, a3, s3
        if math.isfinite(s3) and abs(s3) < best_s:
            best_a, best_s = a3, abs(s3)
        else:
            break
    return best_a


def _refine_bracket(model, params, phi0, a_lo, a_hi, dim, ode_tol, guard) -> float | None:
    """brentq on the accurate terminal slope; None if the bracket does not hold."""
    def s(a):
        return terminal_slope(model, params, phi0, a, dim, ode_tol, guard)
    s_lo, s_hi = s(a_lo), s(a_hi)
    if not (math.isfinite(s_lo) and math.isfinite(s_hi)) or s_lo * s_hi > 0:
        return None
    if s_lo == 0.0:
        return a_lo
    if s_hi == 0.0:
        return a_hi
    root = brentq(s, a_lo, a_hi, xtol=1e-15, rtol=8.9e-16)
    return _polish_root(model, params, phi0, root, dim, guard)


def ladder_crossings(
    model: Model, params: Params, phi0: float, dim: int,
    start: float, direction: float, reach: float,
    guard: float, ode_tol: float = ODE_RTOL,
    n_rungs: int = 70, max_roots: int = 4,
    off_min: float | None = None,
) -> list[float]:
    """Slope roots along a geometric ladder a = start + direction*offset.

    Offsets sweep thirteen decades up to ``reach``, which resolves roots that
    sit exponentially close to the anchor (the repelling extreme constants, or
    the d=1 heteroclinic turning level) where uniform scans are blind. Slopes
    are evaluated with the adaptive integrator: errors of fixed-step sweeps
    get amplified by e^(L) along saddle-hugging orbits and corrupt brackets.
    """
    if reach <= 0:
        return []
    scale = max(1.0, abs(start))
    if off_min is None:
        off_min = 1e-13 * scale
    offs = np.geomspace(off_min, reach, n_rungs)
    avals = start + direction * offs
    slopes = np.array([terminal_slope(model, params, phi0, a, dim, ode_tol, guard)
                       for a in avals])
    roots: list[float] = []
    for i in range(len(avals) - 1):
        if len(roots) >= max_roots:
            break
        s1, s2 = slopes[i], slopes[i + 1]
        if math.isfinite(s1) and math.isfinite(s2) and s1 * s2 < 0:
            lo, hi = sorted((avals[i], avals[i + 1]))
            root = brentq(
                lambda a: terminal_slope(model, params, phi0, a, dim, ode_tol, guard),
                lo, hi, xtol=1e-15, rtol=8.9e-16,
            )
            roots.append(_polish_root(model, params, phi0, float(root), dim, guard))
    return roots


def hamiltonian_turning_levels(
    model: Model, params: Params, phi0: float
) -> tuple[float, float, str] | None:
    """d=1 only: turning values of the orbit at the lower barrier energy.

    The stationary equation in d=1 is the conservative oscillator
    kappa*phi'' = -U'(phi) with U = F - delta/2 (phi+phi0)^2, whose saddles
    are the extreme constants. Returns (a_left, a_right, limiting_side) where
    the orbit at the limiting-barrier energy turns; all non-constant solutions
    have turning points strictly inside, accumulating at these levels.
    """
    roots, _ = consts.k_roots(model, params, phi0)
    if len(roots) < 3:
        return None
    lo_c, mid_c, hi_c = roots[0], roots[1], roots[-1]

    def U(phi):
        return float(eval_F(model, phi)) - 0.5 * params.delta * (phi + phi0) ** 2

    u_lo, u_hi = U(lo_c), U(hi_c)
    side = "lower" if u_lo <= u_hi else "upper"
    e_het = min(u_lo, u_hi)

    # turning values at the heteroclinic energy; an endpoint saddle IS the
    # turning value on its own side (and near-equal barriers degrade to both)
    a_left, a_right = lo_c, hi_c
    if u_lo - e_het > 1e-11 * max(1.0, abs(e_het)):
        try:
            a_left = brentq(lambda a: U(a) - e_het, lo_c, mid_c,
                            xtol=1e-15, rtol=8.9e-16)
        except ValueError:
            a_left = lo_c
    if u_hi - e_het > 1e-11 * max(1.0, abs(e_het)):
        try:
            a_right = brentq(lambda a: U(a) - e_het, mid_c, hi_c,
                             xtol=1e-15, rtol=8.9e-16)
        except ValueError:
            a_right = hi_c
    return float(a_left), float(a_right), side


def monotone_root(
    model: Model, params: Params, phi0: float, dim: int, direction: str,
    n_grid: int = DEFAULT_N_GRID, ode_tol: float = ODE_RTOL,
    hint_offset: float | None = None,
) -> ShootResult | None:
    """The strictly monotone solution of the given direction at phi0, or None.

    Anchored geometric ladders cover all offset scales at once: for d=1 the
    anchor is the exact turning level of the limiting-barrier orbit (monotone
    roots accumulate there exponentially); for d=2 it is the extreme constant
    on the relevant side. A fallback ladder from the middle constant catches
    small-amplitude roots near the bifurcation thresholds. ``hint_offset``
    (previous anchor distance) narrows the first ladder for speed.
    """
    if direction not in ("increasing", "decreasing"):
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    roots, _ = consts.k_roots(model, params, phi0)
    if len(roots) < 3:
        return None
    lo_c, mid_c, hi_c = roots[0], roots[1], roots[-1]
    guard = max(1e3, 4.0 * (abs(lo_c) + abs(hi_c)) + 100.0)

    if dim == 1:
        levels = hamiltonian_turning_levels(model, params, phi0)
        if levels is None:
            return None
        anchor = levels[0] if direction == "increasing" else levels[1]
    else:
        anchor = lo_c if direction == "increasing" else hi_c
    sgn = 1.0 if direction == "increasing" else -1.0
    scale = max(1.0, abs(anchor), abs(mid_c))
    interval = abs(mid_c - anchor) - 1e-10 * scale

    windows = [(anchor, sgn, 1e-13 * scale, interval, 70, 4)]
    if hint_offset is not None and 0.0 < hint_offset < interval:
        windows.insert(0, (anchor, sgn, max(hint_offset / 30.0, 1e-13 * scale),
                           min(hint_offset * 30.0, interval), 24, 4))
    windows.append((mid_c, -sgn, 1e-13 * scale, interval, 70, 8))

    for start, direc, off_lo, off_hi, n_rungs, max_roots in windows:
        if not (0.0 < off_lo < off_hi):
            continue
        for root in ladder_crossings(model, params, phi0, dim, start, direc, off_hi,
                                     guard, ode_tol, n_rungs=n_rungs,
                                     off_min=off_lo, max_roots=max_roots):
            shot = integrate_shoot(model, params, phi0, root, dim, n_grid=n_grid,
                                   guard=guard)
            if shot.profile is not None and is_monotone(shot.profile) == direction:
                return shot
    return None


def monotone_roots(
    model: Model, params: Params, phi0: float, dim: int,
    n_grid: int = DEFAULT_N_GRID, ode_tol: float = ODE_RTOL,
) -> dict[str, ShootResult]:
    """Both monotone solutions at phi0 (when they exist), keyed by direction."""
    out: dict[str, ShootResult] = {}
    for direction in ("increasing", "decreasing"):
        shot = monotone_root(model, params, phi0, dim, direction, n_grid, ode_tol)
        if shot is not None:
            out[direction] = shot
    return out


def find_shooting_roots(
    model: Model,
    params: Params,
    phi0: float,
    dim: int,
    scan_cells: int = DEFAULT_SCAN_CELLS,
    n_grid: int = DEFAULT_N_GRID,
    ode_tol: float = ODE_RTOL,
    slope_tol: float = SLOPE_TOL,
) -> list[ShootResult]:
    """All radial stationary solutions at phi0 (constants included), sorted by a.

    Combines a uniform scan over [phi_-, phi_+] with geometric ladders from
    the extreme constants (and, for d=1, from the limiting-orbit turning
    levels), where monotone roots accumulate beyond any uniform resolution.
    Constants are returned as exact profiles rather than re-shot: shooting
    from a repelling constant amplifies roundoff along its unstable manifold.
    """
    lo, hi = consts.extreme_phis(model, params, phi0)
    const_as, _ = consts.k_roots(model, params, phi0)
    guard = max(1e3, 4.0 * (abs(lo) + abs(hi)) + 100.0)
    span = hi - lo

    roots: list[float] = []
    if span > 1e-9:
        avals = np.linspace(lo, hi, scan_cells + 1)
        slopes = scan_slopes(model, params, phi0, avals, dim, guard=guard)
        sgn = np.sign(slopes)
        ok = np.isfinite(slopes[:-1]) & np.isfinite(slopes[1:])
        brackets = np.nonzero(ok & (sgn[:-1] * sgn[1:] < 0))[0]
        candidates: list[float] = []
        for i in brackets:
            root = _refine_bracket(model, params, phi0, avals[i], avals[i + 1],
                                   dim, ode_tol, guard)
            if root is not None:
                candidates.append(root)

        anchors = [(lo, +1.0, (const_as[1] - lo) * 0.98 if len(const_as) > 2 else span * 0.45),
                   (hi, -1.0, (hi - const_as[-2]) * 0.98 if len(const_as) > 2 else span * 0.45)]
        if dim == 1 and len(const_as) > 2:
            levels = hamiltonian_turning_levels(model, params, phi0)
            if levels is not None:
                a_left, a_right, _ = levels
                anchors += [(a_left, +1.0, (const_as[1] - a_left) * 0.98),
                            (a_right, -1.0, (a_right - const_as[1]) * 0.98)]
        for start, sign, reach in anchors:
            candidates.extend(ladder_crossings(model, params, phi0, dim, start, sign,
                                               reach, guard, ode_tol))

        scale = max(1.0, abs(lo), abs(hi))
        for a_root in sorted(candidates):
            near_const = any(abs(a_root - c) < 1e-12 * scale for c in const_as)
            near_prev = any(abs(a_root - p) < 1e-11 * scale for p in roots)
            if not near_const and not near_prev:
                roots.append(a_root)

        res_cell = span / scan_cells
        all_as = sorted(roots + list(const_as))
        gaps = np.diff(all_as)
        if gaps.size and gaps.min() < res_cell:
            warnings.warn(
                f"shooting roots closer than the uniform scan resolution "
                f"({res_cell:.3g}) at phi0={phi0:.6g}; ladder anchors resolved them, "
                "but increase scan_cells to rule out further missed roots",
                stacklevel=2,
            )

    out = [ShootResult(profile=constant_profile(model, params, phi0, c, dim, n_grid),
                       terminal_slope=0.0, converged=True)
           for c in const_as]
    for a in roots:
        out.append(integrate_shoot(model, params, phi0, a, dim, n_grid=n_grid,
                                   slope_tol=slope_tol, guard=guard))
    out.sort(key=lambda s: s.profile.a if s.profile is not None else math.inf)
    return out


def mass_of_profile(profile: RadialProfile, domain: Domain) -> tuple[float, float]:
    """Total density mass of the profile and its fraction of |Omega|."""
    if domain.dim != profile.dim or domain.n_cells != profile.n_cells:
        raise ValueError("domain grid does not match the profile grid")
    mass = domain.integrate(rho_of_phi(profile.phi))
    return mass, mass / domain.volume


def is_monotone(profile: RadialProfile, flat_tol: float | None = None) -> str:
    """'increasing' | 'decreasing' | 'constant' | 'non_monotone' from dphi signs.

    Default flat_tol is relative to the slope scale: trajectory tails carry
    roundoff amplified along the repelling constants' unstable manifolds.
    """
    if flat_tol is None:
        flat_tol = max(1e-9, 1e-6 * float(np.abs(profile.dphi).max()))
    signs = np.sign(profile.dphi[np.abs(profile.dphi) > flat_tol])
    if signs.size == 0:
        return "constant"
    if np.all(signs > 0):
        return "increasing"
    if np.all(signs < 0):
        return "decreasing"
    return "non_monotone"


def build_periodic(profile: RadialProfile, n_folds: int) -> RadialProfile:
    """Reflect-and-duplicate a monotone d=1 profile into an n-fold periodic one.

    Used only to compare energies of multi-plateau candidates against their
    monotone source; the construction preserves the density integral while
    multiplying the gradient term by n_folds^2.
    """
    if profile.dim != 1:
        raise ValueError("build_periodic is defined for d=1 profiles only")
    if n_folds < 1:
        raise ValueError("n_folds must be >= 1")
    if n_folds == 1:
        return RadialProfile(
            r=profile.r.copy(), phi=profile.phi.copy(), dphi=profile.dphi.copy(),
            dim=1, phi0=profile.phi0, a=profile.a,
        )
    x = profile.r
    t = np.mod(n_folds * x, 2.0)
    s = np.where(t <= 1.0, t, 2.0 - t)
    sgn = np.where(t <= 1.0, 1.0, -1.0)
    sp_phi = CubicSpline(profile.r, profile.phi)
    sp_dphi = CubicSpline(profile.r, profile.dphi)
    phi = sp_phi(s)
    dphi = n_folds * sgn * sp_dphi(s)
    return RadialProfile(r=x.copy(), phi=phi, dphi=dphi, dim=1,
                         phi0=profile.phi0, a=float(phi[0]))


def bvp_residual(profile: RadialProfile, model: Model, params: Params) -> float:
    """Sup-norm residual of the stationary equation on the stored grid.

    phi'' is obtained by sixth-order differentiation of the stored dphi; the
    r=0 singularity of the radial term uses the regular limit
    (phi'' + (d-1) phi'/r)(0) = d * phi''(0).
    """
    h = profile.r[1] - profile.r[0]
    ddphi = deriv6(profile.dphi, h)
    lap = np.empty_like(ddphi)
    if profile.dim > 1:
        lap[1:] = ddphi[1:] + (profile.dim - 1) * profile.dphi[1:] / profile.r[1:]
        lap[0] = profile.dim * ddphi[0]
    else:
        lap[:] = ddphi
    res = -params.kappa * lap + params.delta * (profile.phi + profile.phi0) - eval_f(model, profile.phi)
    return float(np.abs(res).max())


def constant_profile(
    model: Model, params: Params, phi0: float, value: float, dim: int,
    n_grid: int = DEFAULT_N_GRID,
) -> RadialProfile:
    """The trivial profile phi == value (value should solve k(phi) = phi0)."""
    r = np.linspace(0.0, 1.0, n_grid + 1)
    return RadialProfile(r=r, phi=np.full(n_grid + 1, float(value)),
                         dphi=np.zeros(n_grid + 1), dim=dim, phi0=phi0, a=float(value))

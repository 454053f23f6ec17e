"""Time integration of the full nonlinear system and of its linearization.

Semi-implicit finite-volume scheme on the profile grid: diffusion terms are
backward-Euler implicit (tridiagonal solves), drift and source explicit. The
density flux is assembled at cell faces with zero end fluxes, so the discrete
mass sum(fv_w * rho) is conserved to solver roundoff by construction.

update order per step: the potential D first (source g(rho^n) explicit), then
rho with the fresh D in the drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve

from .functionals import PairField, quad_LD, lyapunov, energy_FM
from .models import Domain, Model, Params, g_source, rho_of_phi
from .shooting import RadialProfile

RHO_GUARD = 1e-12


class SchemeFailure(RuntimeError):
    """The discrete density left (0,1); the continuous solution cannot."""


@dataclass
class State:
    rho: np.ndarray
    D: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(rho=self.rho.copy(), D=self.D.copy(), t=self.t)


@dataclass
class DtPolicy:
    dt0: float = 1e-4
    adaptive: bool = True
    err_tol: float = 1e-7
    dt_min: float = 1e-9
    dt_max: float = 5e-2
    growth: float = 1.3


@dataclass
class RunSummary:
    times: np.ndarray
    mass_trace: np.ndarray
    functional_trace: np.ndarray          # Lyapunov (II) or F_M proxy (I)
    distance_trace: np.ndarray            # sup-norm rho distance to matched profile
    terminal_distance: float
    matched_index: int | None
    rate: float | None                    # log-linear fit of the distance trace


@dataclass
class LinearRunSummary:
    times: np.ndarray
    int_u_trace: np.ndarray
    quad_LD_trace: np.ndarray
    sup_u_trace: np.ndarray
    final_pair: PairField


def _face_coeff(domain: Domain) -> np.ndarray:
    return domain.sigma * domain.face_r ** (domain.dim - 1) / domain.h


def _implicit_banded(domain: Domain, dt: float, diffusivity: float, decay: float):
    """Banded form of W + dt*(diffusivity*T + decay*W), T the FV stiffness."""
    fc = _face_coeff(domain) * dt * diffusivity
    w = domain.fv_w * (1.0 + dt * decay)
    n = domain.n_cells + 1
    ab = np.zeros((3, n))
    ab[0, 1:] = -fc                    # upper diag
    ab[2, :-1] = -fc                   # lower diag
    ab[1] = w
    ab[1, :-1] += fc
    ab[1, 1:] += fc
    return ab


def _drift_divergence(domain: Domain, g_face: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Weighted divergence of the drift flux g_f * dD/dr (not divided by fv_w)."""
    flux = _face_coeff(domain) * g_face * np.diff(D)
    out = np.zeros(domain.n_cells + 1)
    out[:-1] += flux
    out[1:] -= flux
    return out


def step(state: State, dt: float, model: Model, params: Params, domain: Domain) -> State:
    """One semi-implicit step of the coupled system."""
    rho, D = state.rho, state.D
    w = domain.fv_w

    ab_D = _implicit_banded(domain, dt, params.kappa, params.delta)
    D_new = solve_banded((1, 1), ab_D, w * (D + dt * g_source(model, rho)))

    g_face = 0.5 * (rho[:-1] * (1.0 - rho[:-1]) + rho[1:] * (1.0 - rho[1:]))
    drift = _drift_divergence(domain, g_face, D_new)
    ab_rho = _implicit_banded(domain, dt, 1.0, 0.0)
    rho_new = solve_banded((1, 1), ab_rho, w * rho - dt * drift)

    if rho_new.min() < RHO_GUARD or rho_new.max() > 1.0 - RHO_GUARD:
        raise SchemeFailure(
            f"density left [{RHO_GUARD}, 1-{RHO_GUARD}] at t={state.t + dt:.6g}"
        )
    return State(rho=rho_new, D=D_new, t=state.t + dt)


def _state_err(s1: State, s2: State) -> float:
    return max(float(np.abs(s1.rho - s2.rho).max()),
               float(np.abs(s1.D - s2.D).max()) * 1e-3)


def _fit_rate(times: np.ndarray, dists: np.ndarray) -> float | None:
    mask = dists > 0
    if mask.sum() < 4:
        return None
    t, d = times[mask], np.log(dists[mask])
    i0, i1 = len(t) // 4, max(len(t) // 4 + 2, 3 * len(t) // 4)
    if i1 - i0 < 2:
        return None
    coef = np.polyfit(t[i0:i1], d[i0:i1], 1)
    return float(coef[0])


def run(
    initial: State,
    T: float,
    dt_policy: DtPolicy,
    model: Model,
    params: Params,
    domain: Domain,
    stationary_library: list[State] | None = None,
    n_samples: int = 200,
) -> RunSummary:
    """Integrate to time T, sampling diagnostics and matching the terminal state.

    The functional trace is the Lyapunov functional for Model II and the
    mass-constrained energy F_M[D] for Model I (a proxy: no Lyapunov
    functional is known there).
    """
    state = initial.copy()
    lib = stationary_library or []
    sample_times = np.linspace(0.0, T, n_samples + 1)

    times, masses, funcs, dists = [], [], [], []
    mass0 = domain.integrate_fv(state.rho)

    def nearest(s: State) -> tuple[float, int | None]:
        if not lib:
            return math.nan, None
        d = [float(np.abs(s.rho - e.rho).max()) for e in lib]
        j = int(np.argmin(d))
        return d[j], j

    def sample(s: State):
        times.append(s.t)
        masses.append(domain.integrate_fv(s.rho))
        if model is Model.II:
            funcs.append(lyapunov(model, params, s.rho, s.D, domain))
        else:
            funcs.append(energy_FM(model, params, mass0, s.D, domain).value)
        dists.append(nearest(s)[0])

    sample(state)
    dt = dt_policy.dt0
    next_idx = 1
    while state.t < T - 1e-14 and next_idx <= n_samples:
        t_target = sample_times[next_idx]
        while state.t < t_target - 1e-14:
            dt_eff = min(dt, t_target - state.t, dt_policy.dt_max)
            if dt_policy.adaptive:
                full = step(state, dt_eff, model, params, domain)
                half = step(step(state, dt_eff / 2, model, params, domain),
                            dt_eff / 2, model, params, domain)
                err = _state_err(full, half)
                if err > dt_policy.err_tol and dt_eff > dt_policy.dt_min:
                    dt = max(dt_eff / 2.0, dt_policy.dt_min)
                    continue
                state = half
                if err < dt_policy.err_tol / 4.0:
                    dt = min(dt_eff * dt_policy.growth, dt_policy.dt_max)
            else:
                state = step(state, dt_eff, model, params, domain)
        sample(state)
        next_idx += 1

    times_a = np.array(times)
    dists_a = np.array(dists)
    term, j = nearest(state)
    return RunSummary(
        times=times_a,
        mass_trace=np.array(masses),
        functional_trace=np.array(funcs),
        distance_trace=dists_a,
        terminal_distance=term,
        matched_index=j,
        rate=_fit_rate(times_a, dists_a),
    )


# ---------------------------------------------------------------------------
# linearized flow around a stationary profile
# ---------------------------------------------------------------------------

def linearized_step(
    pair: PairField, dt: float, profile: RadialProfile, model: Model,
    params: Params, domain: Domain, g: np.ndarray, h_rho: np.ndarray,
) -> PairField:
    u, v = pair.u, pair.v
    w = domain.fv_w
    fc = _face_coeff(domain)

    # u-equation: implicit diffusion; explicit drift and v-coupling fluxes
    rho = rho_of_phi(profile.phi)
    one_m2r_face = 0.5 * ((1.0 - 2.0 * rho[:-1]) + (1.0 - 2.0 * rho[1:]))
    u_face = 0.5 * (u[:-1] + u[1:])
    g_face = 0.5 * (g[:-1] + g[1:])
    dD_face = np.diff(profile.phi) / domain.h
    expl_flux = fc * (-one_m2r_face * u_face * dD_face * domain.h
                      - g_face * np.diff(v))
    expl = np.zeros_like(u)
    expl[:-1] += expl_flux
    expl[1:] -= expl_flux
    ab_u = _implicit_banded(domain, dt, 1.0, 0.0)
    u_new = solve_banded((1, 1), ab_u, w * u + dt * expl)

    # v-equation: implicit kappa-diffusion and decay; explicit h(rho) u
    ab_v = _implicit_banded(domain, dt, params.kappa, params.delta)
    v_new = solve_banded((1, 1), ab_v, w * (v + dt * h_rho * u))
    return PairField(u=u_new, v=v_new)


def linearized_evolve(
    profile: RadialProfile,
    pair0: PairField,
    T: float,
    params: Params,
    model: Model,
    domain: Domain,
    dt: float = 1e-4,
    n_samples: int = 100,
) -> LinearRunSummary:
    """Integrate the linearized flow; the zero-mean property of u is enforced
    at t=0 and conserved exactly by the flux form."""
    from .models import eval_h

    g = rho_of_phi(profile.phi) * (1.0 - rho_of_phi(profile.phi))
    h_rho = np.asarray(eval_h(model, rho_of_phi(profile.phi)), dtype=float)
    u0 = pair0.u - domain.integrate_fv(pair0.u) / domain.volume
    pair = PairField(u=u0.copy(), v=pair0.v.copy())

    sample_times = np.linspace(0.0, T, n_samples + 1)
    times, int_u, ld, sup_u = [0.0], [domain.integrate_fv(pair.u)], \
        [quad_LD(profile, params, pair, domain)], [float(np.abs(pair.u).max())]
    t = 0.0
    for t_target in sample_times[1:]:
        while t < t_target - 1e-14:
            dt_eff = min(dt, t_target - t)
            pair = linearized_step(pair, dt_eff, profile, model, params, domain, g, h_rho)
            t += dt_eff
        times.append(t)
        int_u.append(domain.integrate_fv(pair.u))
        ld.append(quad_LD(profile, params, pair, domain))
        sup_u.append(float(np.abs(pair.u).max()))
    return LinearRunSummary(
        times=np.array(times), int_u_trace=np.array(int_u),
        quad_LD_trace=np.array(ld), sup_u_trace=np.array(sup_u), final_pair=pair,
    )


# ---------------------------------------------------------------------------
# discrete stationary states of the scheme
# ---------------------------------------------------------------------------

def stationary_state_from_profile(profile: RadialProfile) -> State:
    """(rho, D) of a stationary profile: rho = logistic(phi), D = phi + phi0."""
    return State(rho=np.asarray(rho_of_phi(profile.phi)),
                 D=profile.phi + profile.phi0, t=0.0)


def discrete_stationary(
    state0: State, model: Model, params: Params, domain: Domain,
    tol: float = 1e-12, max_iter: int = 40,
) -> State:
    """Newton-refine a state to an exact fixed point of the discrete scheme.

    Solves the scheme's own stationarity equations (zero net flux for rho,
    discrete potential balance for D) at fixed total mass; the result differs
    from the continuum profile by the spatial truncation error and is the
    right reference when measuring convergence of time integration.
    """
    n = domain.n_cells + 1
    w = domain.fv_w
    fc = _face_coeff(domain)
    mass0 = domain.integrate_fv(state0.rho)
    rho, D = state0.rho.copy(), state0.D.copy()

    def residual(rho, D):
        g_face = 0.5 * (rho[:-1] * (1.0 - rho[:-1]) + rho[1:] * (1.0 - rho[1:]))
        flux = fc * (np.diff(rho) - g_face * np.diff(D))
        r1 = np.zeros(n)
        r1[:-1] += flux
        r1[1:] -= flux
        lapD = np.zeros(n)
        fD = fc * np.diff(D)
        lapD[:-1] += fD
        lapD[1:] -= fD
        r2 = params.kappa * lapD - params.delta * w * D + w * g_source(model, rho)
        r1[0] = domain.integrate_fv(rho) - mass0
        return r1, r2

    for _ in range(max_iter):
        r1, r2 = residual(rho, D)
        res = max(np.abs(r1).max(), np.abs(r2).max())
        if res < tol:
            break
        # Jacobian blocks (sparse); row 0 of the rho block is the mass constraint
        gp = 1.0 - 2.0 * rho                     # d g(rho)/d rho with g = rho(1-rho)
        dD = np.diff(D)
        J11 = sp.lil_matrix((n, n))
        J12 = sp.lil_matrix((n, n))
        for i in range(n - 1):
            c = fc[i]
            # flux_i = c*(rho[i+1]-rho[i] - g_face*(D[i+1]-D[i]))
            d_left = -c * (1.0 + 0.5 * gp[i] * dD[i])
            d_right = c * (1.0 - 0.5 * gp[i + 1] * dD[i])
            gf = 0.5 * (rho[i] * (1 - rho[i]) + rho[i + 1] * (1 - rho[i + 1]))
            J11[i, i] += d_left
            J11[i, i + 1] += d_right
            J12[i, i] += c * gf
            J12[i, i + 1] += -c * gf
            J11[i + 1, i] -= d_left
            J11[i + 1, i + 1] -= d_right
            J12[i + 1, i] -= c * gf
            J12[i + 1, i + 1] -= -c * gf
        J11[0, :] = w
        J12[0, :] = 0.0
        lap = sp.lil_matrix((n, n))
        for i in range(n - 1):
            c = fc[i]
            lap[i, i] -= c
            lap[i, i + 1] += c
            lap[i + 1, i + 1] -= c
            lap[i + 1, i] += c
        if model is Model.I:
            dsrc = 1.0 - 2.0 * rho
        else:
            dsrc = np.ones(n)
        J21 = sp.diags(w * dsrc)
        J22 = params.kappa * lap.tocsr() - params.delta * sp.diags(w)
        J = sp.bmat([[J11.tocsr(), J12.tocsr()], [J21, J22]], format="csc")
        delta_x = spsolve(J, -np.concatenate([r1, r2]))
        rho = rho + delta_x[:n]
        D = D + delta_x[n:]
    r1, r2 = residual(rho, D)
    res = max(np.abs(r1).max(), np.abs(r2).max())
    if res > 1e-9:
        raise SchemeFailure(f"discrete stationary refinement stalled (residual {res:.2e})")
    return State(rho=rho, D=D, t=0.0)

"""Scalar functionals and variational stability indices.

Energy at fixed multiplier phi0:

    E[phi] = kappa/2 * int |grad phi|^2 + delta/2 * int (phi+phi0)^2 - int F(phi)

Mass-constrained energy F_M[D] = E[D - phi0] with phi0 = phi0_of_mass(D, M).

Model II carries the Lyapunov functional

    L[rho, D] = int [rho log rho + (1-rho) log(1-rho) - rho D]
                + kappa/2 int |grad D|^2 + delta/2 int D^2

and the quadratic forms L_D, I_D of its linearization. Minimizing L over rho
at fixed mass gives the Legendre-type lower bound

    L[rho, D] >= E[D - phi0] - phi0 * M,

with equality iff rho = 1/(1+exp(-(D-phi0))). (The -phi0*M term vanishes in
the gauge phi0 = 0, i.e. when M equals the mass of 1/(1+exp(-D)).)

The stability indices are constrained smallest eigenvalues of the linearized
energy operator E_phi = -kappa*Lap + delta - f'(phi):

    Lambda   : over { int v * rho(1-rho) = 0 },
    Lambda_1 : twice the infimum of L_D over { int u = 0, int v^2 = 1 },
               reduced to v alone by optimizing u.

Both are computed from the finite-volume discretization, which is exactly
self-adjoint in the fv inner product, so they reduce to symmetric dense
eigenproblems after an explicit projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .grids import apply_laplacian, deriv4, face_grad, grad_energy, laplacian_matrix
from .models import Domain, Model, Params, eval_F, eval_fprime, eval_h, rho_of_phi
from .shooting import RadialProfile

RHO_FLOOR = 1e-14


@dataclass
class EnergyValue:
    value: float
    gradient_term: float      # int |grad phi|^2
    confinement_term: float   # int (phi + phi0)^2
    potential_term: float     # int F(phi)

    def reassemble(self, params: Params) -> float:
        return (params.kappa / 2.0 * self.gradient_term
                + params.delta / 2.0 * self.confinement_term - self.potential_term)


@dataclass
class PairField:
    u: np.ndarray
    v: np.ndarray


def _energy_from_fields(model, params, phi0, phi, dphi, domain) -> EnergyValue:
    grad = domain.integrate(np.asarray(dphi) ** 2)
    conf = domain.integrate((np.asarray(phi) + phi0) ** 2)
    pot = domain.integrate(eval_F(model, phi))
    value = params.kappa / 2.0 * grad + params.delta / 2.0 * conf - pot
    return EnergyValue(value=float(value), gradient_term=float(grad),
                       confinement_term=float(conf), potential_term=float(pot))


def energy_E(model: Model, params: Params, phi0: float, profile: RadialProfile,
             domain: Domain) -> EnergyValue:
    """Energy of a radial profile at fixed phi0 (gradient from stored dphi)."""
    return _energy_from_fields(model, params, phi0, profile.phi, profile.dphi, domain)


def phi0_of_mass(D: np.ndarray, mass: float, domain: Domain) -> float:
    """The unique phi0 with int 1/(1+exp(phi0-D)) = mass."""
    if not (0.0 < mass < domain.volume):
        raise ValueError(f"mass must lie in (0, {domain.volume}), got {mass}")
    D = np.asarray(D, dtype=float)

    def defect(p0):
        return domain.integrate(rho_of_phi(D - p0)) - mass

    lo, hi = float(D.min()), float(D.max())
    width = max(hi - lo, 1.0)
    lo, hi = lo - width, hi + width
    while defect(lo) < 0.0:
        lo -= width
    while defect(hi) > 0.0:
        hi += width
    root = brentq(defect, lo, hi, xtol=1e-14, rtol=8.9e-16)
    if abs(defect(root)) > 1e-12 * domain.volume:
        raise RuntimeError("phi0_of_mass bisection did not meet the residual target")
    return float(root)


def energy_FM(model: Model, params: Params, mass: float, D: np.ndarray,
              domain: Domain, dD: np.ndarray | None = None) -> EnergyValue:
    """Mass-constrained energy F_M[D] = E[D - phi0_of_mass(D, M)]."""
    D = np.asarray(D, dtype=float)
    if dD is None:
        dD = deriv4(D, domain.h)
    phi0 = phi0_of_mass(D, mass, domain)
    return _energy_from_fields(model, params, phi0, D - phi0, dD, domain)


def lyapunov(model: Model, params: Params, rho: np.ndarray, D: np.ndarray,
             domain: Domain, dD: np.ndarray | None = None) -> float:
    """Lyapunov functional of Model II; rejects Model I and degenerate rho."""
    if model is not Model.II:
        raise ValueError("the Lyapunov functional exists for Model II only")
    rho = np.asarray(rho, dtype=float)
    D = np.asarray(D, dtype=float)
    if rho.min() < RHO_FLOOR or rho.max() > 1.0 - RHO_FLOOR:
        raise ValueError("rho touches {0,1}; entropy integrand undefined")
    if dD is None:
        dD = deriv4(D, domain.h)
    ent = domain.integrate(rho * np.log(rho) + (1.0 - rho) * np.log1p(-rho) - rho * D)
    return float(ent + params.kappa / 2.0 * domain.integrate(np.asarray(dD) ** 2)
                 + params.delta / 2.0 * domain.integrate(D**2))


def lyapunov_energy_gap(model: Model, params: Params, rho: np.ndarray, D: np.ndarray,
                        domain: Domain, dD: np.ndarray | None = None) -> float:
    """L[rho,D] - (E[D-phi0] - phi0*M): nonnegative, zero iff rho = logistic(D-phi0)."""
    mass = domain.integrate(rho)
    phi0 = phi0_of_mass(D, mass, domain)
    if dD is None:
        dD = deriv4(D, domain.h)
    e = _energy_from_fields(model, params, phi0, np.asarray(D) - phi0, dD, domain)
    return lyapunov(model, params, rho, D, domain, dD) - (e.value - phi0 * mass)


# ---------------------------------------------------------------------------
# linearized energy operator and constrained eigenvalues
# ---------------------------------------------------------------------------

def g_weight(profile: RadialProfile) -> np.ndarray:
    """rho*(1-rho) along the profile."""
    rho = rho_of_phi(profile.phi)
    return np.asarray(rho * (1.0 - rho))


def apply_Ephi(profile: RadialProfile, params: Params, model: Model,
               v: np.ndarray, domain: Domain) -> np.ndarray:
    """E_phi v = -kappa*Lap(v) + delta*v - rho(1-rho)h(rho) v (Neumann ends)."""
    fp = eval_fprime(model, profile.phi)
    return -params.kappa * apply_laplacian(np.asarray(v, float), domain) \
        + (params.delta - fp) * np.asarray(v, float)


def _ephi_symmetrized(profile: RadialProfile, params: Params, model: Model,
                      domain: Domain) -> tuple[np.ndarray, np.ndarray]:
    """Dense symmetric matrix B = W^(1/2) E_phi W^(-1/2) and sqrt-weights."""
    lap = laplacian_matrix(domain).toarray()
    fp = eval_fprime(model, profile.phi)
    A = -params.kappa * lap + np.diag(params.delta - fp)
    sw = np.sqrt(domain.fv_w)
    B = (sw[:, None] * A) / sw[None, :]
    return 0.5 * (B + B.T), sw


def _orth_complement_basis(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of span{c} via a Householder reflector."""
    n = c.size
    u = c / np.linalg.norm(c)
    vh = u.copy()
    vh[0] -= 1.0
    nv = np.linalg.norm(vh)
    if nv < 1e-14:
        return np.eye(n)[:, 1:]
    vh /= nv
    H = np.eye(n) - 2.0 * np.outer(vh, vh)
    return H[:, 1:]


def lambda_var_mode(profile: RadialProfile, params: Params, model: Model,
                    domain: Domain) -> tuple[float, np.ndarray]:
    """Smallest Rayleigh quotient of E_phi under int v*rho(1-rho) = 0, with minimizer."""
    B, sw = _ephi_symmetrized(profile, params, model, domain)
    c = sw * g_weight(profile)
    Q = _orth_complement_basis(c)
    Bred = Q.T @ B @ Q
    vals, vecs = eigh(Bred, subset_by_index=[0, 0])
    v = (Q @ vecs[:, 0]) / sw
    v /= np.sqrt(domain.integrate_fv(v * v))
    return float(vals[0]), v


def lambda_var(profile: RadialProfile, params: Params, model: Model,
               domain: Domain) -> float:
    """Variational index Lambda (also evaluated for Model I, where it is
    reported without an attached stability theorem)."""
    return lambda_var_mode(profile, params, model, domain)[0]


def lambda1(profile: RadialProfile, params: Params, model: Model,
            domain: Domain) -> float:
    """Lambda_1 = 2 inf L_D over {int u = 0, int v^2 = 1} (Model II only).

    u is eliminated through u = (v - vbar)*rho(1-rho); the remaining quadratic
    form is E_phi plus a positive rank-one term, so Lambda_1 <= Lambda holds
    exactly at the discrete level.
    """
    if model is not Model.II:
        raise ValueError("Lambda_1 is defined through the Model II Lyapunov functional")
    B, sw = _ephi_symmetrized(profile, params, model, domain)
    g = g_weight(profile)
    c = sw * g
    B1 = B + np.outer(c, c) / domain.integrate_fv(g)
    vals = eigh(B1, eigvals_only=True, subset_by_index=[0, 0])
    return float(vals[0])


# ---------------------------------------------------------------------------
# quadratic forms of the linearized Lyapunov functional
# ---------------------------------------------------------------------------

def _check_pair(profile: RadialProfile, pair: PairField):
    n = profile.r.size
    if pair.u.shape != (n,) or pair.v.shape != (n,):
        raise ValueError("pair fields must live on the profile grid")
    g = g_weight(profile)
    if g.min() < RHO_FLOOR:
        raise ValueError("rho*(1-rho) degenerate on the grid")
    return g


def quad_LD(profile: RadialProfile, params: Params, pair: PairField,
            domain: Domain) -> float:
    """L_D[u,v] = int(u^2/(2 rho(1-rho)) - u v) + kappa/2 int|grad v|^2 + delta/2 int v^2."""
    g = _check_pair(profile, pair)
    u, v = pair.u, pair.v
    bulk = domain.integrate_fv(u * u / (2.0 * g) - u * v)
    return float(bulk + params.kappa / 2.0 * grad_energy(v, v, domain)
                 + params.delta / 2.0 * domain.integrate_fv(v * v))


def quad_ID(profile: RadialProfile, params: Params, pair: PairField,
            domain: Domain) -> float:
    """I_D[u,v]: dissipation form of the linearized flow (nonnegative)."""
    g = _check_pair(profile, pair)
    u, v = pair.u, pair.v
    eta = u / g - v
    geta = face_grad(eta, domain)
    gf = 0.5 * (g[:-1] + g[1:])
    flux_term = 0.5 * float(np.dot(domain.face_w, gf * geta * geta))
    zeta = -params.kappa * apply_laplacian(v, domain) + params.delta * v - u
    return flux_term + 0.5 * domain.integrate_fv(zeta * zeta)


def inner_form(pair1: PairField, pair2: PairField, profile: RadialProfile,
               params: Params, domain: Domain) -> float:
    """Bilinear form with 2*L_D[u,v] = <<(u,v),(u,v)>>."""
    g = _check_pair(profile, pair1)
    _check_pair(profile, pair2)
    u1, v1, u2, v2 = pair1.u, pair1.v, pair2.u, pair2.v
    bulk = domain.integrate_fv(u1 * u2 / g - u1 * v2 - u2 * v1)
    return float(bulk + params.kappa * grad_energy(v1, v2, domain)
                 + params.delta * domain.integrate_fv(v1 * v2))


def apply_HD(profile: RadialProfile, params: Params, model: Model,
             pair: PairField, domain: Domain) -> PairField:
    """Grid action of the linearized evolution operator H_D around the profile.

    First component in conservative form div(g grad(u/g - v)) with face-mean g,
    which makes the operator exactly <<.,.>>-self-adjoint at the discrete level
    for Model II.
    """
    g = _check_pair(profile, pair)
    u, v = pair.u, pair.v
    eta = u / g - v
    gf = 0.5 * (g[:-1] + g[1:])
    flux = domain.face_w / domain.h * gf * face_grad(eta, domain)
    h1 = np.zeros_like(u)
    h1[:-1] += flux
    h1[1:] -= flux
    h1 /= domain.fv_w
    rho = rho_of_phi(profile.phi)
    h2 = params.kappa * apply_laplacian(v, domain) - params.delta * v \
        + eval_h(model, rho) * u
    return PairField(u=h1, v=h2)

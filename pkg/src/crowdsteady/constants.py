"""Constant stationary solutions: classification, folds, instability, dispersion.

Constant solutions at Lagrange multiplier phi0 are the roots of
k(phi) = f(phi)/delta - phi = phi0. For Models I/II, k' = f'/delta - 1 has
either no zero (delta >= max f') or exactly two zeros phi_a < phi_b around the
argmax of f', so k is monotone outside [phi_a, phi_b] and increasing inside.
Roots are therefore bracketed piecewise-monotonically, which finds all of them
without any scan resolution concerns (including arbitrarily large |phi0|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .models import (
    Domain,
    Model,
    Params,
    argmax_fprime,
    eval_fprime,
    eval_h,
    k_of,
    max_fprime,
    neumann_eigenvalue,
    rho_of_phi,
)

DEGENERATE_TOL = 1e-8   # phi separation below which a root pair counts as a fold
ROOT_RESIDUAL_TOL = 1e-12

# sup of f over R, used to bound root locations: every root of k(phi)=phi0
# satisfies -phi0 < phi < f_sup/delta - phi0.
_F_SUP = {Model.I: 0.25, Model.II: 1.0}


@dataclass
class ConstantSolution:
    phi0: float
    phi: float
    rho: float
    mass: float | None
    branch_label: str                      # 'lower' | 'middle' | 'upper'
    variationally_unstable: bool | None
    mu_roots_n1: tuple[complex, complex] | None
    degenerate: bool = False


@dataclass
class FoldData:
    phi0_minus: float
    phi0_plus: float
    phi_at_folds: tuple[float, float]      # (phi_a, phi_b), roots of f' = delta
    mass_lower_bound: float                # M^(-)
    mass_upper_bound: float                # M^(+)
    # log-scale companions: at delta = 1e-3 the Model II bounds sit around
    # exp(-990), far below the smallest positive double, so strict positivity
    # is only expressible in logs: log M^(-) and log(|Omega| - M^(+)).
    log_mass_lower_bound: float = float("-inf")
    log_mass_gap_upper: float = float("-inf")


@dataclass
class InstabilityInterval:
    phi_interval: tuple[float, float]
    mass_interval: tuple[float, float]


def _solve_fprime_equals(model: Model, level: float) -> tuple[float, float]:
    """The two roots of f'(phi) = level on either side of the argmax of f'."""
    if not (0.0 < level < max_fprime(model)):
        raise ValueError("level must lie strictly between 0 and max f'")
    ps = argmax_fprime(model)
    lo = ps - 5.0
    while eval_fprime(model, lo) >= level:
        lo -= 5.0
    left = brentq(lambda p: eval_fprime(model, p) - level, lo, ps, xtol=1e-14)
    hi = ps + 5.0
    while eval_fprime(model, hi) >= level:
        hi += 5.0
    right = brentq(lambda p: eval_fprime(model, p) - level, ps, hi, xtol=1e-14)
    return left, right


def _newton_polish(model: Model, params: Params, phi0: float, phi: float) -> float:
    for _ in range(8):
        res = k_of(model, params, phi) - phi0
        if abs(res) <= ROOT_RESIDUAL_TOL:
            break
        slope = eval_fprime(model, phi) / params.delta - 1.0
        if slope == 0.0:
            break
        step = res / slope
        phi = phi - step
        if abs(step) < 1e-15 * max(1.0, abs(phi)):
            break
    return phi


def k_roots(model: Model, params: Params, phi0: float) -> tuple[list[float], bool]:
    """All roots of k(phi) = phi0, plus a flag for a double root at a fold."""
    lo_bound = min(-phi0 - 2.0, 0.0) - 2.0
    hi_bound = max(_F_SUP[model] / params.delta - phi0 + 2.0, 0.0) + 2.0

    if params.delta >= max_fprime(model):
        pieces = [(lo_bound, hi_bound)]
    else:
        phi_a, phi_b = _solve_fprime_equals(model, params.delta)
        pieces = [
            (min(lo_bound, phi_a - 1.0), phi_a),
            (phi_a, phi_b),
            (phi_b, max(hi_bound, phi_b + 1.0)),
        ]

    def g(phi: float) -> float:
        return float(k_of(model, params, phi)) - phi0

    roots: list[float] = []
    for a, b in pieces:
        ga, gb = g(a), g(b)
        # fold contact: k - phi0 vanishes at a piece endpoint (double root there)
        if abs(ga) <= 1e-9:
            roots.append(a)
        if abs(gb) <= 1e-9:
            roots.append(b)
        if ga * gb < 0.0:
            roots.append(brentq(g, a, b, xtol=1e-13))

    roots = [_newton_polish(model, params, phi0, p) for p in roots]
    roots.sort()
    out: list[float] = []
    degenerate = False
    for p in roots:
        if out and abs(p - out[-1]) < DEGENERATE_TOL:
            degenerate = True
            continue
        out.append(p)
    return out, degenerate


def constant_solutions(
    model: Model,
    params: Params,
    phi0: float,
    domain: Domain | None = None,
) -> list[ConstantSolution]:
    """All constant stationary solutions at a given phi0, sorted by phi.

    When a domain is supplied, each solution carries its mass, the variational
    (in)stability flag kappa*lambda_1 + delta - f'(phi) < 0 and the two n=1
    dispersion roots.
    """
    roots, degenerate = k_roots(model, params, phi0)
    folds = fold_points(model, params)
    labels = _branch_labels(roots, phi0, folds)
    out = []
    for phi, label in zip(roots, labels):
        rho = float(rho_of_phi(phi))
        if domain is not None:
            mass = domain.volume * rho
            lam1 = neumann_eigenvalue(domain, 1)
            unstable = params.kappa * lam1 + params.delta - float(eval_fprime(model, phi)) < 0.0
            mu = constant_dispersion(model, params, domain, rho, 1)
        else:
            mass, unstable, mu = None, None, None
        out.append(
            ConstantSolution(
                phi0=phi0, phi=float(phi), rho=rho, mass=mass, branch_label=label,
                variationally_unstable=unstable, mu_roots_n1=mu, degenerate=degenerate,
            )
        )
    return out


def _branch_labels(roots: list[float], phi0: float, folds: FoldData | None) -> list[str]:
    if len(roots) == 3:
        return ["lower", "middle", "upper"]
    if len(roots) == 2:
        # at a fold: the merged pair and the surviving extreme branch
        return ["lower", "upper"]
    if folds is None:
        return ["lower"]
    if phi0 >= folds.phi0_plus:
        return ["lower"]
    if phi0 <= folds.phi0_minus:
        return ["upper"]
    return ["lower"]


def fold_points(model: Model, params: Params, domain: Domain | None = None) -> FoldData | None:
    """Fold values phi0^-, phi0^+ of the constant branch, or None if delta >= max f'.

    Mass bounds are the extrema over phi0 in [phi0^-, phi0^+] of the endpoint
    masses |Omega|*rho(phi_-(phi0)) and |Omega|*rho(phi_+(phi0)); by
    monotonicity of phi0 -> phi_+- these sit at the opposite folds. |Omega| is
    taken from ``domain`` when given, else normalized to 1.
    """
    if params.delta >= max_fprime(model):
        return None
    vol = 1.0 if domain is None else domain.volume
    phi_a, phi_b = _solve_fprime_equals(model, params.delta)
    phi0_minus = float(k_of(model, params, phi_a))
    phi0_plus = float(k_of(model, params, phi_b))

    # extreme-branch values at the opposite folds (M^(+-) attained there)
    phi_low_at_plus = _extreme_root(model, params, phi0_plus, phi_a, side="lower")
    phi_high_at_minus = _extreme_root(model, params, phi0_minus, phi_b, side="upper")
    m_minus = vol * float(rho_of_phi(phi_low_at_plus))
    m_plus = vol * float(rho_of_phi(phi_high_at_minus))
    # log rho = -softplus(-phi), log(1 - rho) = -softplus(phi): underflow-free
    log_m_minus = math.log(vol) - float(np.logaddexp(0.0, -phi_low_at_plus))
    log_gap_plus = math.log(vol) - float(np.logaddexp(0.0, phi_high_at_minus))
    return FoldData(
        phi0_minus=phi0_minus,
        phi0_plus=phi0_plus,
        phi_at_folds=(phi_a, phi_b),
        mass_lower_bound=m_minus,
        mass_upper_bound=m_plus,
        log_mass_lower_bound=log_m_minus,
        log_mass_gap_upper=log_gap_plus,
    )


def _extreme_root(model: Model, params: Params, phi0: float, fold_phi: float, side: str) -> float:
    g = lambda p: float(k_of(model, params, p)) - phi0
    if side == "lower":
        lo = min(-phi0 - 2.0, fold_phi - 1.0) - 2.0
        return brentq(g, lo, fold_phi, xtol=1e-13)
    hi = max(_F_SUP[model] / params.delta - phi0 + 2.0, fold_phi + 1.0)
    return brentq(g, fold_phi, hi, xtol=1e-13)


def extreme_phis(model: Model, params: Params, phi0: float) -> tuple[float, float]:
    """(phi_-, phi_+): min and max constant-solution values at phi0.

    Every radial solution at this phi0 takes values inside this interval,
    which is what bounds the shooting scan.
    """
    roots, _ = k_roots(model, params, phi0)
    return roots[0], roots[-1]


def instability_interval(
    model: Model, params: Params, domain: Domain
) -> InstabilityInterval | None:
    """phi and mass ranges where constant solutions are variationally unstable.

    The defining inequality is kappa*lambda_1 + delta < f'(phi); None when the
    threshold exceeds max f'.
    """
    thr = params.kappa * neumann_eigenvalue(domain, 1) + params.delta
    if thr >= max_fprime(model):
        return None
    phi_lo, phi_hi = _solve_fprime_equals(model, thr)
    vol = domain.volume
    return InstabilityInterval(
        phi_interval=(phi_lo, phi_hi),
        mass_interval=(vol * float(rho_of_phi(phi_lo)), vol * float(rho_of_phi(phi_hi))),
    )


def constant_for_mass(domain: Domain, mass: float) -> float:
    """The unique constant phi whose density has the given total mass."""
    if not (0.0 < mass < domain.volume):
        raise ValueError(f"mass must lie in (0, {domain.volume}), got {mass}")
    return -math.log(domain.volume / mass - 1.0)


def constant_dispersion(
    model: Model, params: Params, domain: Domain, rho: float, n: int
) -> tuple[complex, complex]:
    """Roots of the mode-n dispersion polynomial at a constant solution.

    mu^2 - [(kappa+1)*lambda_n + delta]*mu
        + lambda_n*[kappa*lambda_n + delta - rho*(1-rho)*h(rho)] = 0,
    returned sorted by real part (these are eigenvalues of -H_D on mode n).
    """
    lam = neumann_eigenvalue(domain, n)
    b = (params.kappa + 1.0) * lam + params.delta
    c = lam * (params.kappa * lam + params.delta - rho * (1.0 - rho) * float(eval_h(model, rho)))
    disc = complex(b * b - 4.0 * c)
    root = np.sqrt(disc)
    mu1, mu2 = (b - root) / 2.0, (b + root) / 2.0
    if mu1.real > mu2.real:
        mu1, mu2 = mu2, mu1
    return (complex(mu1), complex(mu2))


def min_dispersion_real_part(
    model: Model, params: Params, domain: Domain, rho: float, n_max: int = 64
) -> float:
    """min over 1 <= n <= n_max of the real parts of the dispersion roots."""
    best = math.inf
    for n in range(1, n_max + 1):
        mu1, _ = constant_dispersion(model, params, domain, rho, n)
        best = min(best, mu1.real)
    return best

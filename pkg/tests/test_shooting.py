import math
import warnings

import numpy as np
import pytest

from crowdsteady import constants as C
from crowdsteady import shooting as S
from crowdsteady.collocation import collocation_solve
from crowdsteady.models import Model, Params, eval_fprime, rho_of_phi

P_I = Params(kappa=5e-4, delta=1e-3)
P_II = Params(kappa=1e-2, delta=1e-3)


def test_constant_root_shot_is_constant():
    roots, _ = C.k_roots(Model.I, P_I, 130.0)
    a = roots[0]          # strongly attracting side: the shot stays put
    res = S.integrate_shoot(Model.I, P_I, 130.0, a, 1)
    assert abs(res.terminal_slope) < 1e-10
    assert np.abs(res.profile.phi - a).max() < 1e-10
    assert S.is_monotone(res.profile) == "constant"


def test_small_offset_slope_sign_matches_linearization():
    """Near the middle constant the terminal slope follows the linearized mode.

    kappa psi'' = (delta - f'(c)) psi with psi(0)=1: oscillatory when
    f'(c) > delta, so phi'(1) ~ -da * omega * sin(omega) for small da.
    """
    phi0 = 130.0
    roots, _ = C.k_roots(Model.I, P_I, phi0)
    a_m = roots[1]
    omega = math.sqrt((float(eval_fprime(Model.I, a_m)) - P_I.delta) / P_I.kappa)
    predicted_sign = -math.copysign(1.0, math.sin(omega))
    for da in (1e-6, 1e-5):
        slope = S.terminal_slope(Model.I, P_I, phi0, a_m + da, 1)
        assert math.copysign(1.0, slope) == predicted_sign
        slope_neg = S.terminal_slope(Model.I, P_I, phi0, a_m - da, 1)
        assert math.copysign(1.0, slope_neg) == -predicted_sign


def test_blowup_guard_marks_divergence():
    res = S.integrate_shoot(Model.I, P_I, 130.0, 0.0, 1, guard=2.0)
    assert res.diverged and res.profile is None and not res.converged


@pytest.mark.parametrize("model,params,dim,phi0", [
    (Model.I, P_I, 1, 130.0),
    (Model.II, P_II, 2, 400.0),
])
def test_plateau_matches_collocation_oracle(model, params, dim, phi0):
    shot = S.monotone_root(model, params, phi0, dim, "increasing")
    prof = shot.profile
    oracle = collocation_solve(model, params, phi0, dim, prof.r, prof.phi)
    assert np.abs(oracle - prof.phi).max() < 1e-6
    assert S.bvp_residual(prof, model, params) < 1e-8
    lo, hi = C.extreme_phis(model, params, phi0)
    assert prof.phi.min() >= lo - 1e-8 and prof.phi.max() <= hi + 1e-8


def test_mass_of_profile_constants(dom1, dom2):
    for dom in (dom1, dom2):
        prof = S.constant_profile(Model.I, P_I, 0.0, 0.0, dom.dim, dom.n_cells)
        mass, frac = S.mass_of_profile(prof, dom)
        assert mass == pytest.approx(dom.volume / 2.0, abs=1e-12)
        assert frac == pytest.approx(0.5, abs=1e-12)
        prof_c = S.constant_profile(Model.I, P_I, 0.0, 1.3, dom.dim, dom.n_cells)
        mass_c, _ = S.mass_of_profile(prof_c, dom)
        assert mass_c == pytest.approx(dom.volume * float(rho_of_phi(1.3)), abs=1e-12)


def test_plateau_mass_between_bracketing_constants(dom1):
    phi0 = 130.0
    shot = S.monotone_root(Model.I, P_I, phi0, 1, "increasing")
    mass, _ = S.mass_of_profile(shot.profile, dom1)
    lo, hi = C.extreme_phis(Model.I, P_I, phi0)
    assert float(rho_of_phi(lo)) < mass < float(rho_of_phi(hi))


def test_find_shooting_roots_census(dom1):
    """phi0 in the bifurcated range: constants, the monotone pair, and
    multi-plateau roots; root set stable under doubling scan_cells."""
    phi0 = 130.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res1 = S.find_shooting_roots(Model.I, P_I, phi0, 1, scan_cells=1000)
        res2 = S.find_shooting_roots(Model.I, P_I, phi0, 1, scan_cells=2000)
    kinds1 = [S.is_monotone(r.profile) for r in res1]
    assert kinds1.count("constant") == 3
    assert "increasing" in kinds1 and "decreasing" in kinds1
    a1 = np.array([r.profile.a for r in res1])
    a2 = np.array([r.profile.a for r in res2])
    assert a1.size == a2.size
    assert np.abs(np.sort(a1) - np.sort(a2)).max() < 1e-8


def test_outside_folds_single_constant_root():
    folds = C.fold_points(Model.I, P_I)
    for phi0 in (folds.phi0_minus - 2.0, folds.phi0_plus + 2.0):
        res = S.find_shooting_roots(Model.I, P_I, phi0, 1, scan_cells=200)
        assert len(res) == 1
        assert S.is_monotone(res[0].profile) == "constant"


def test_nonconstant_only_inside_folds_small_sweep():
    folds = C.fold_points(Model.I, P_I)
    span = folds.phi0_plus - folds.phi0_minus
    sweep = np.concatenate([
        np.linspace(folds.phi0_minus - 0.3 * span, folds.phi0_minus - 1e-3, 8),
        np.linspace(folds.phi0_plus + 1e-3, folds.phi0_plus + 0.3 * span, 8),
    ])
    for phi0 in sweep:
        res = S.find_shooting_roots(Model.I, P_I, float(phi0), 1, scan_cells=150)
        assert all(S.is_monotone(r.profile) == "constant" for r in res)


def test_monotone_pair_reflection_d1(dom1):
    shots = S.monotone_roots(Model.I, P_I, 130.0, 1)
    inc, dec = shots["increasing"].profile, shots["decreasing"].profile
    assert np.abs(inc.phi - dec.phi[::-1]).max() < 1e-7
    m_inc, _ = S.mass_of_profile(inc, dom1)
    m_dec, _ = S.mass_of_profile(dec, dom1)
    assert m_inc == pytest.approx(m_dec, abs=1e-9)


def test_build_periodic_identity_and_folding(dom1):
    shot = S.monotone_root(Model.I, P_I, 130.0, 1, "increasing")
    prof = shot.profile
    same = S.build_periodic(prof, 1)
    assert np.array_equal(same.phi, prof.phi)

    two = S.build_periodic(prof, 2)
    assert S.is_monotone(two) == "non_monotone"
    m1, _ = S.mass_of_profile(prof, dom1)
    m2, _ = S.mass_of_profile(two, dom1)
    assert m2 == pytest.approx(m1, abs=1e-7)
    grad1 = dom1.integrate(prof.dphi**2)
    grad2 = dom1.integrate(two.dphi**2)
    assert grad2 == pytest.approx(4.0 * grad1, rel=1e-3)

    three = S.build_periodic(prof, 3)
    grad3 = dom1.integrate(three.dphi**2)
    assert grad3 == pytest.approx(9.0 * grad1, rel=1e-3)


def test_build_periodic_rejects_d2():
    prof = S.constant_profile(Model.I, P_I, 0.0, 0.0, 2, 64)
    with pytest.raises(ValueError):
        S.build_periodic(prof, 2)


def test_is_monotone_classes():
    r = np.linspace(0, 1, 65)
    mk = lambda phi: S.RadialProfile(r=r, phi=phi, dphi=np.gradient(phi, r),
                                     dim=1, phi0=0.0, a=float(phi[0]))
    assert S.is_monotone(mk(np.full(65, 2.0))) == "constant"
    assert S.is_monotone(mk(r**2)) == "increasing"
    assert S.is_monotone(mk(1 - r)) == "decreasing"
    assert S.is_monotone(mk(np.cos(2 * np.pi * r))) == "non_monotone"

import math

import numpy as np
import pytest

from crowdsteady import constants as C
from crowdsteady import functionals as F
from crowdsteady import shooting as S
from crowdsteady import spectrum as SP
from crowdsteady.models import Model, Params, neumann_eigenvalue

P_I = Params(kappa=5e-4, delta=1e-3)
P_II = Params(kappa=1e-2, delta=1e-3)


@pytest.fixture(scope="module")
def basis1(dom1):
    return SP.SpectralBasis(dom1, 128)


@pytest.fixture(scope="module")
def basis2(dom2):
    return SP.SpectralBasis(dom2, 128)


def test_basis_mass_matrix_d1(basis1):
    M = basis1.mass_matrix
    off = M - np.diag(np.diag(M))
    assert np.abs(off).max() < 1e-12
    assert M[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(np.diag(M)[1:] - 0.5).max() < 1e-12


def test_basis_mass_matrix_d2_spd(basis2):
    M = basis2.mass_matrix
    assert np.abs(M - M.T).max() < 1e-14
    vals = np.linalg.eigvalsh(M)
    assert vals.min() > 0.0


def test_basis_projection_roundtrip(dom1, basis1):
    coeffs = np.zeros(128)
    coeffs[[0, 3, 17]] = [0.5, -1.2, 0.25]
    values = basis1.evaluate(coeffs)
    back = basis1.project(values)
    # limited by the cubic-spline interpolation of mode 17 on the nodal grid
    assert np.abs(back - coeffs).max() < 5e-7


def _mid_constant(model, params, phi0, dom):
    sols = C.constant_solutions(model, params, phi0, dom)
    mid = [s for s in sols if s.branch_label == "middle"][0]
    return S.constant_profile(model, params, phi0, mid.phi, dom.dim, dom.n_cells), mid


@pytest.mark.parametrize("model,params,phi0", [
    (Model.I, P_I, 130.0), (Model.II, P_II, 400.0),
])
def test_constant_blocks_match_dispersion_d1(model, params, phi0, dom1, basis1):
    prof, mid = _mid_constant(model, params, phi0, dom1)
    rep = SP.dynamical_spectrum(prof, params, model, basis1)
    evs = rep.eigenvalues
    for n in range(1, 6):
        for mu in C.constant_dispersion(model, params, dom1, mid.rho, n):
            dist = np.abs(evs - mu).min()
            assert dist < 1e-10 * max(1.0, abs(mu))


def test_constant_blocks_match_dispersion_d2(dom2, basis2):
    prof, mid = _mid_constant(Model.I, P_I, 130.0, dom2)
    rep = SP.dynamical_spectrum(prof, P_I, Model.I, basis2)
    evs = rep.eigenvalues
    for n in range(1, 5):
        for mu in C.constant_dispersion(Model.I, P_I, dom2, mid.rho, n):
            dist = np.abs(evs - mu).min()
            assert dist < 1e-9 * max(1.0, abs(mu))


def test_delta_is_an_eigenvalue(dom1, basis1):
    prof, _ = _mid_constant(Model.II, P_II, 400.0, dom1)
    rep = SP.dynamical_spectrum(prof, P_II, Model.II, basis1)
    assert np.abs(rep.eigenvalues - P_II.delta).min() < 1e-12


def test_unstable_inside_stable_outside(dom1, basis1):
    interval = C.instability_interval(Model.II, P_II, dom1)
    phi_in = 0.5 * sum(interval.phi_interval)
    phi0_in = float(C.k_of(Model.II, P_II, phi_in))
    prof_in = S.constant_profile(Model.II, P_II, phi0_in, phi_in, 1, dom1.n_cells)
    rep_in = SP.dynamical_spectrum(prof_in, P_II, Model.II, basis1)
    assert rep_in.mu1 < 0 and not rep_in.dynamically_stable

    phi_out = interval.phi_interval[1] + 1.5
    phi0_out = float(C.k_of(Model.II, P_II, phi_out))
    prof_out = S.constant_profile(Model.II, P_II, phi0_out, phi_out, 1, dom1.n_cells)
    rep_out = SP.dynamical_spectrum(prof_out, P_II, Model.II, basis1)
    assert rep_out.mu1 > 0 and rep_out.dynamically_stable


def test_model2_plateau_spectrum_real(dom1, basis1):
    shot = S.monotone_root(Model.II, P_II, 500.0, 1, "increasing")
    rep = SP.dynamical_spectrum(shot.profile, P_II, Model.II, basis1)
    radius = np.abs(rep.eigenvalues).max()
    assert np.abs(rep.eigenvalues.imag).max() <= 1e-8 * radius


def test_basis_refinement_mu1(dom1):
    shot = S.monotone_root(Model.II, P_II, 500.0, 1, "increasing")
    mu64 = SP.dynamical_spectrum(shot.profile, P_II, Model.II,
                                 SP.SpectralBasis(dom1, 64)).mu1
    mu128 = SP.dynamical_spectrum(shot.profile, P_II, Model.II,
                                  SP.SpectralBasis(dom1, 128)).mu1
    assert abs(mu64 - mu128) < 1e-6


def test_kernel_check_threshold_mode(dom1, basis1):
    thr = P_II.kappa * neumann_eigenvalue(dom1, 1) + P_II.delta
    phi_lo, _ = C._solve_fprime_equals(Model.II, thr)
    phi0 = float(C.k_of(Model.II, P_II, phi_lo))
    prof = S.constant_profile(Model.II, P_II, phi0, phi_lo, 1, dom1.n_cells)
    v = np.cos(np.pi * dom1.r)
    assert SP.kernel_check(prof, P_II, Model.II, v, basis1) < 1e-8
    # generic direction: residual comparable to ||E_phi v|| (order-one here)
    v2 = np.cos(2 * np.pi * dom1.r)
    res2 = SP.kernel_check(prof, P_II, Model.II, v2, basis1)
    ev2 = F.apply_Ephi(prof, P_II, Model.II, v2, dom1)
    scale = math.sqrt(dom1.integrate_fv(ev2**2) / dom1.integrate_fv(v2**2))
    assert 0.05 * scale < res2 < 20.0 * scale
    with pytest.raises(ValueError):
        SP.kernel_check(prof, P_II, Model.II, np.zeros(dom1.n_cells + 1), basis1)


def test_selfadjoint_residual_model2(dom1, basis1):
    shot = S.monotone_root(Model.II, P_II, 500.0, 1, "increasing")
    res, indefinite = SP.selfadjoint_residual(shot.profile, P_II, Model.II, basis1)
    assert res < 1e-8
    assert not indefinite


def test_selfadjoint_refuses_model1(dom1, basis1):
    shot = S.monotone_root(Model.I, P_I, 130.0, 1, "increasing")
    with pytest.raises(ValueError):
        SP.selfadjoint_residual(shot.profile, P_I, Model.I, basis1)


def test_inner_identity_reconfirmed(dom1, basis1):
    shot = S.monotone_root(Model.II, P_II, 500.0, 1, "increasing")
    prof = shot.profile
    rng = np.random.default_rng(9)
    dec = 1.0 / (1.0 + np.arange(128)) ** 2
    pair = F.PairField(u=basis1.evaluate(rng.standard_normal(128) * dec),
                       v=basis1.evaluate(rng.standard_normal(128) * dec))
    assert 2.0 * F.quad_LD(prof, P_II, pair, dom1) == pytest.approx(
        F.inner_form(pair, pair, prof, P_II, dom1), rel=1e-12)


def test_constraint_enforced(dom1, basis1):
    """Eigenvectors of the reduced problem have zero-mean u by construction."""
    prof, _ = _mid_constant(Model.II, P_II, 400.0, dom1)
    A, M2 = SP.assemble_HD(prof, P_II, Model.II, basis1)
    import scipy.linalg as sla
    n = basis1.n_modes
    Z = sla.null_space(basis1.mode_integrals[None, :])
    assert np.abs(basis1.mode_integrals @ Z).max() < 1e-12

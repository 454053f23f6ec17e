import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdsteady import constants as C
from crowdsteady.models import (
    Domain,
    Model,
    Params,
    eval_fprime,
    k_of,
    neumann_eigenvalue,
    rho_of_phi,
)

P_I = Params(kappa=5e-4, delta=1e-3)
P_II = Params(kappa=1e-2, delta=1e-3)


def test_single_solution_when_delta_large():
    p = Params(kappa=1e-2, delta=0.3)      # delta > max f' for both models
    for model in (Model.I, Model.II):
        for phi0 in (-50.0, -1.0, 0.0, 3.0, 200.0):
            roots, deg = C.k_roots(model, p, phi0)
            assert len(roots) == 1 and not deg
        assert C.fold_points(model, p) is None


def test_three_solutions_inside_folds():
    folds = C.fold_points(Model.I, P_I)
    assert folds.phi0_minus < folds.phi0_plus
    for frac in (0.1, 0.5, 0.9):
        phi0 = folds.phi0_minus + frac * (folds.phi0_plus - folds.phi0_minus)
        roots, deg = C.k_roots(Model.I, P_I, phi0)
        assert len(roots) == 3 and not deg
    for phi0 in (folds.phi0_minus - 1.0, folds.phi0_plus + 1.0):
        roots, _ = C.k_roots(Model.I, P_I, phi0)
        assert len(roots) == 1


def test_roots_residual_and_order(dom1):
    folds = C.fold_points(Model.I, P_I)
    phi0 = 0.5 * (folds.phi0_minus + folds.phi0_plus)
    sols = C.constant_solutions(Model.I, P_I, phi0, dom1)
    assert [s.branch_label for s in sols] == ["lower", "middle", "upper"]
    assert sols[0].phi < sols[1].phi < sols[2].phi
    for s in sols:
        assert abs(float(k_of(Model.I, P_I, s.phi)) - phi0) <= 1e-10
        assert s.mass == pytest.approx(dom1.volume * s.rho, abs=1e-15)


def test_limits_of_unique_root():
    for model, p in ((Model.I, P_I), (Model.II, P_II)):
        hi, _ = C.k_roots(model, p, 1e4)
        lo, _ = C.k_roots(model, p, -1e4)
        assert float(rho_of_phi(hi[0])) < 1e-10          # phi0 -> +inf: rho -> 0
        assert float(rho_of_phi(lo[0])) > 1 - 1e-10      # phi0 -> -inf: rho -> 1


def test_degenerate_flags_fire_exactly_at_folds():
    folds = C.fold_points(Model.I, P_I)
    for phi0 in (folds.phi0_minus, folds.phi0_plus):
        sols = C.constant_solutions(Model.I, P_I, phi0)
        assert all(s.degenerate for s in sols)
        assert len(sols) == 2
    mid = 0.5 * (folds.phi0_minus + folds.phi0_plus)
    assert not any(s.degenerate for s in C.constant_solutions(Model.I, P_I, mid))


def test_fold_mass_bounds_strictly_inside(dom1):
    # Model I bounds are representable doubles; Model II bounds underflow
    # (they sit near exp(-990)), so strict insideness is asserted in logs.
    folds = C.fold_points(Model.I, P_I, dom1)
    assert 0.0 < folds.mass_lower_bound < folds.mass_upper_bound < dom1.volume
    for model, p in ((Model.I, P_I), (Model.II, P_II)):
        folds = C.fold_points(model, p, dom1)
        assert math.isfinite(folds.log_mass_lower_bound)
        assert math.isfinite(folds.log_mass_gap_upper)
        assert folds.log_mass_lower_bound < math.log(dom1.volume)
        assert folds.log_mass_gap_upper < math.log(dom1.volume)


def test_fold_mass_bounds_match_sampled_extrema(dom1):
    """The extreme-branch monotonicity places the mass extrema at the opposite
    folds; cross-check by sampling."""
    folds = C.fold_points(Model.I, P_I, dom1)
    grid = np.linspace(folds.phi0_minus, folds.phi0_plus, 400)[1:-1]
    lo_masses, hi_masses = [], []
    for phi0 in grid:
        lo, hi = C.extreme_phis(Model.I, P_I, float(phi0))
        lo_masses.append(dom1.volume * float(rho_of_phi(lo)))
        hi_masses.append(dom1.volume * float(rho_of_phi(hi)))
    assert folds.mass_lower_bound <= min(lo_masses) + 1e-12
    assert folds.mass_upper_bound >= max(hi_masses) - 1e-12
    # and the sampled extrema converge to the fold values at the interval ends
    assert min(lo_masses) == pytest.approx(folds.mass_lower_bound, rel=1e-2, abs=1e-12)
    assert max(hi_masses) == pytest.approx(folds.mass_upper_bound, rel=1e-2)


def test_extreme_branches_monotone_decreasing():
    folds = C.fold_points(Model.I, P_I)
    grid = np.linspace(folds.phi0_minus, folds.phi0_plus, 120)[1:-1]
    lows, mids, highs = [], [], []
    for phi0 in grid:
        roots, _ = C.k_roots(Model.I, P_I, float(phi0))
        lows.append(roots[0])
        mids.append(roots[1])
        highs.append(roots[2])
    assert np.all(np.diff(lows) < 0)
    assert np.all(np.diff(highs) < 0)
    assert np.all(np.diff(mids) > 0)      # middle branch increases with phi0


def test_instability_interval_model1_d1(dom1):
    interval = C.instability_interval(Model.I, P_I, dom1)
    thr = P_I.kappa * neumann_eigenvalue(dom1, 1) + P_I.delta
    lo, hi = interval.phi_interval
    # derived oracle: endpoints solve f'(phi) = thr, bisection from scratch
    from scipy.optimize import bisect
    star = math.log(2.0 - math.sqrt(3.0))
    left = bisect(lambda t: float(eval_fprime(Model.I, t)) - thr, -40.0, star, xtol=1e-13)
    right = bisect(lambda t: float(eval_fprime(Model.I, t)) - thr, star, 0.0, xtol=1e-13)
    assert lo == pytest.approx(left, abs=1e-9)
    assert hi == pytest.approx(right, abs=1e-9)
    assert np.all(eval_fprime(Model.I, np.linspace(lo + 1e-6, hi - 1e-6, 101)) > thr)
    # contained in the fold phi interval
    folds = C.fold_points(Model.I, P_I)
    assert folds.phi_at_folds[0] < lo < hi < folds.phi_at_folds[1]
    m_lo, m_hi = interval.mass_interval
    assert m_lo == pytest.approx(dom1.volume * float(rho_of_phi(lo)), abs=1e-14)
    assert m_hi == pytest.approx(dom1.volume * float(rho_of_phi(hi)), abs=1e-14)


def test_instability_interval_empty_when_threshold_large(dom1):
    p = Params(kappa=5e-2, delta=1e-3)     # kappa*pi^2 >> max f' for Model I
    assert C.instability_interval(Model.I, p, dom1) is None


def test_constant_for_mass(dom1, dom2):
    assert C.constant_for_mass(dom1, 0.5) == 0.0
    assert C.constant_for_mass(dom1, 0.75) == pytest.approx(math.log(3.0), rel=1e-14)
    for dom in (dom1, dom2):
        for frac in (0.1, 0.5, 0.9):
            m = frac * dom.volume
            phi = C.constant_for_mass(dom, m)
            assert dom.volume * float(rho_of_phi(phi)) == pytest.approx(m, abs=1e-12)
    with pytest.raises(ValueError):
        C.constant_for_mass(dom1, 0.0)
    with pytest.raises(ValueError):
        C.constant_for_mass(dom2, 4.0)


def test_dispersion_trivial_mode(dom1):
    mu = C.constant_dispersion(Model.II, P_II, dom1, 0.3, 0)
    assert mu[0] == pytest.approx(0.0, abs=1e-15)
    assert mu[1] == pytest.approx(P_II.delta, abs=1e-15)


def test_dispersion_negative_root_model2(dom1):
    mu1, mu2 = C.constant_dispersion(Model.II, Params(kappa=1e-2, delta=1e-3),
                                     dom1, 0.5, 1)
    # kappa*pi^2 + delta - 1/4 < 0 forces one negative real root
    assert mu1.imag == 0.0 and mu1.real < 0.0
    assert mu2.real > 0.0


@given(
    st.sampled_from([Model.I, Model.II]),
    st.floats(min_value=-4, max_value=-1),
    st.floats(min_value=-4, max_value=-0.5),
    st.floats(min_value=0.01, max_value=0.99),
    st.integers(min_value=1, max_value=12),
)
@settings(max_examples=60, deadline=None)
def test_dispersion_root_identities(model, lk, ld, rho, n):
    params = Params(kappa=10.0**lk, delta=10.0**ld)
    dom = Domain(1, 8)
    lam = neumann_eigenvalue(dom, n)
    mu1, mu2 = C.constant_dispersion(model, params, dom, rho, n)
    h = 1.0 - 2.0 * rho if model is Model.I else 1.0
    prod = lam * (params.kappa * lam + params.delta - rho * (1 - rho) * h)
    summ = (params.kappa + 1.0) * lam + params.delta
    # the product reconstructs through b^2 - disc, losing ~eps*b^2 absolutely
    assert (mu1 * mu2).real == pytest.approx(prod, rel=1e-9, abs=1e-13 * (1 + summ**2))
    assert (mu1 + mu2).real == pytest.approx(summ, rel=1e-12)
    assert mu1.real <= mu2.real
    if prod < 0:
        assert mu1.real < 0.0


def test_equivalence_sweep_small(dom1):
    rng = np.random.default_rng(11)
    for model in (Model.I, Model.II):
        for _ in range(100):
            kappa = 10.0 ** rng.uniform(-4, -1)
            delta = 10.0 ** rng.uniform(-4, -0.5)
            rho = rng.uniform(1e-3, 1 - 1e-3)
            p = Params(kappa=kappa, delta=delta)
            h = 1.0 - 2.0 * rho if model is Model.I else 1.0
            crit = kappa * neumann_eigenvalue(dom1, 1) + delta - rho * (1 - rho) * h
            mn = C.min_dispersion_real_part(model, p, dom1, rho, n_max=60)
            assert (mn < 0) == (crit < 0)

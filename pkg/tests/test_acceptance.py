"""Acceptance suite: one test per criterion, at the stated tolerances.

Shared heavyweight artifacts (traced branches, spectral bases) come from the
session-scoped ``ctx`` fixture; each test prints its PASS/FAIL line so the
suite doubles as a verification report (also reachable via
``crowdsteady verify``).
"""

from crowdsteady import verification as V


def _run(check, ctx):
    res = check(ctx)
    print("\n" + res.line())
    assert res.passed, res.detail


def test_acceptance_exact_constants(ctx):
    _run(V.check_exact_constants, ctx)


def test_acceptance_constant_classification(ctx):
    _run(V.check_constant_classification, ctx)


def test_acceptance_dispersion_equivalence(ctx):
    _run(V.check_dispersion_equivalence, ctx)


def test_acceptance_shooting_oracle(ctx):
    _run(V.check_shooting_oracle, ctx)


def test_acceptance_branch_structure(ctx):
    _run(V.check_branch_structure, ctx)


def test_acceptance_model2_stability_theory(ctx):
    _run(V.check_model2_stability_theory, ctx)


def test_acceptance_lyapunov_ge_energy(ctx):
    _run(V.check_lyapunov_energy_inequality, ctx)


def test_acceptance_evolution_cross_check(ctx):
    _run(V.check_evolution, ctx)


def test_acceptance_coexistence(ctx):
    _run(V.check_coexistence, ctx)


def test_coexistence_regression_mass(ctx):
    """Concrete regression: the stored mass value exhibits both stable states.

    Established at the first successful run of the coexistence search (Model I,
    d=1, kappa=5e-4, delta=1e-3): plateau points past the constant-instability
    interval with mu1 > 0 exist around this mass.
    """
    import numpy as np

    from crowdsteady import constants as C
    from crowdsteady.models import Model
    from crowdsteady.verification import DEFAULT_PARAMS

    stored_mass = 0.492001                # frozen at first successful run
    model, params = Model.I, DEFAULT_PARAMS[Model.I]
    domain = ctx.domain(1)
    interval = C.instability_interval(model, params, domain)
    m_lo, m_hi = interval.mass_interval
    assert not (m_lo < stored_mass < m_hi)
    rho_c = stored_mass / domain.volume
    assert C.min_dispersion_real_part(model, params, domain, rho_c) > 0
    branch = ctx.branch(Model.I, 1)
    pts = [p for p in branch.points if p.monotone_dir != "constant"]
    masses = np.array([p.mass for p in pts])
    mus = np.array([p.mu1 for p in pts])
    j = int(np.argmin(np.abs(masses - stored_mass)))
    assert abs(masses[j] - stored_mass) < 5e-3
    assert mus[j] > 0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdsteady.models import (
    Domain,
    Model,
    Params,
    argmax_fprime,
    disk_nonradial_lambda10,
    eval_F,
    eval_f,
    eval_fprime,
    g_source,
    k_of,
    max_fprime,
    neumann_eigenvalue,
    rho_of_phi,
)

PHI_GRID = np.linspace(-30.0, 30.0, 241)
EPS = 1e-5


def test_logistic_values():
    assert rho_of_phi(0.0) == 0.5
    assert rho_of_phi(math.log(3.0)) == pytest.approx(0.75, abs=1e-15)
    assert rho_of_phi(700.0) == 1.0
    assert rho_of_phi(-700.0) == pytest.approx(0.0, abs=1e-300)
    assert rho_of_phi(-700.0) > 0.0


@given(st.floats(min_value=-700, max_value=700, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_logistic_bounds(phi):
    r = float(rho_of_phi(phi))
    assert 0.0 <= r <= 1.0


def test_f_values_at_zero():
    assert eval_f(Model.I, 0.0) == pytest.approx(0.25, abs=1e-15)
    assert eval_fprime(Model.I, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert eval_f(Model.II, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert eval_fprime(Model.II, 0.0) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("model", [Model.I, Model.II])
def test_f_is_derivative_of_F(model):
    fd = (eval_F(model, PHI_GRID + EPS) - eval_F(model, PHI_GRID - EPS)) / (2 * EPS)
    assert np.abs(fd - eval_f(model, PHI_GRID)).max() < 5.0 * EPS**2


@pytest.mark.parametrize("model", [Model.I, Model.II])
def test_fprime_is_derivative_of_f(model):
    fd = (eval_f(model, PHI_GRID + EPS) - eval_f(model, PHI_GRID - EPS)) / (2 * EPS)
    assert np.abs(fd - eval_fprime(model, PHI_GRID)).max() < 5.0 * EPS**2


@pytest.mark.parametrize("model", [Model.I, Model.II])
def test_fprime_identity_rho_form(model):
    rho = rho_of_phi(PHI_GRID)
    h = 1.0 - 2.0 * rho if model is Model.I else np.ones_like(rho)
    assert np.abs(eval_fprime(model, PHI_GRID) - rho * (1 - rho) * h).max() < 1e-14


def test_max_fprime_exact_values():
    assert max_fprime(Model.I) == pytest.approx(1.0 / (6.0 * math.sqrt(3.0)), abs=1e-16)
    assert max_fprime(Model.II) == 0.25


@pytest.mark.parametrize("model", [Model.I, Model.II])
def test_max_fprime_attained_and_bounding(model):
    m = max_fprime(model)
    assert abs(float(eval_fprime(model, argmax_fprime(model))) - m) < 1e-10
    assert np.all(eval_fprime(model, PHI_GRID) <= m + 1e-15)


def test_k_examples():
    p = Params(kappa=5e-4, delta=1e-3)
    assert float(k_of(Model.I, p, 0.0)) == pytest.approx(250.0, abs=1e-10)
    assert float(k_of(Model.II, p, 0.0)) == pytest.approx(500.0, abs=1e-10)
    for phi in (80.0, -80.0, 300.0, -300.0):
        assert float(k_of(Model.I, p, phi)) == pytest.approx(-phi, abs=1e-10 + 0.25 / p.delta * 1e-30)


@given(st.floats(min_value=50, max_value=600))
@settings(max_examples=30, deadline=None)
def test_k_asymptote(phi):
    p = Params(kappa=5e-4, delta=1e-3)
    assert abs(float(k_of(Model.I, p, phi)) + phi) < eval_f(Model.I, phi) / p.delta + 1e-12


def test_g_source():
    assert float(g_source(Model.I, 0.25)) == pytest.approx(0.1875)
    assert float(g_source(Model.II, 0.25)) == 0.25


def test_params_validation():
    with pytest.raises(ValueError):
        Params(kappa=0.0, delta=1e-3)
    with pytest.raises(ValueError):
        Params(kappa=1e-3, delta=-1.0)


def test_neumann_eigenvalues_d1():
    dom = Domain(1, 8)
    assert neumann_eigenvalue(dom, 0) == 0.0
    assert neumann_eigenvalue(dom, 1) == pytest.approx(math.pi**2, rel=1e-14)
    assert abs(neumann_eigenvalue(dom, 1) - 9.87) < 5e-3


def test_neumann_eigenvalues_d2():
    dom = Domain(2, 8)
    lam01 = neumann_eigenvalue(dom, 1)
    assert abs(lam01 - 14.68) < 5e-3
    assert abs(math.sqrt(lam01) - 3.83) < 5e-3
    lam10 = disk_nonradial_lambda10()
    assert abs(lam10 - 3.39) < 5e-3
    assert abs(math.sqrt(lam10) - 1.84) < 5e-3


@pytest.mark.parametrize("dim", [1, 2])
def test_neumann_strictly_increasing(dim):
    dom = Domain(dim, 8)
    vals = [neumann_eigenvalue(dom, n) for n in range(0, 12)]
    assert vals[0] == 0.0
    assert all(b > a for a, b in zip(vals[1:], vals[2:]))
    assert vals[1] > 0


@pytest.mark.parametrize("dim", [1, 2])
def test_quadrature_polynomial_exactness(dim):
    dom = Domain(dim, 1024)
    r = dom.r
    for k in range(4):
        exact = dom.sigma / (k + dom.dim)          # int_0^1 r^k r^(d-1) dr * sigma
        got = dom.integrate(r**k)
        assert abs(got - exact) < 1e-12


def test_domain_volume():
    assert Domain(1, 8).volume == 1.0
    assert Domain(2, 8).volume == pytest.approx(math.pi, rel=1e-15)
    assert Domain(2, 1024).integrate(np.ones(1025)) == pytest.approx(math.pi, abs=1e-12)


def test_domain_validation():
    with pytest.raises(ValueError):
        Domain(3, 8)
    with pytest.raises(ValueError):
        Domain(1, 7)

"""Constrained spectrum of the linearized evolution operator H_D.

The pair (u, v) is expanded in cosine modes cos(n*pi*r), which satisfy the
Neumann conditions at both ends and, for d=2, regularity at the center. The
modes are orthogonal for d=1 but not under the r dr measure, so the discrete
problem is a generalized eigenproblem with the Gram (mass) matrix.

Galerkin integrals are evaluated with composite Gauss quadrature (5 points per
profile cell), which is exact to machine precision for the oscillatory mode
products at the default sizes; profile-dependent coefficients enter through a
cubic spline of the stored profile.

Sign convention: matrices tabulate -H_D, so dynamical stability of a
stationary solution means the constrained spectrum is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import CubicSpline

from .functionals import PairField, apply_HD, g_weight, inner_form
from .models import Domain, Model, Params, eval_h, rho_of_phi
from .shooting import RadialProfile

GAUSS_PER_CELL = 5
DEFAULT_MODES = 128


class SpectrumError(RuntimeError):
    pass


@dataclass(eq=False)
class SpectralBasis:
    domain: Domain
    n_modes: int = DEFAULT_MODES

    @cached_property
    def _quad(self) -> tuple[np.ndarray, np.ndarray]:
        """Composite Gauss nodes and plain-dr weights on [0,1]."""
        xg, wg = np.polynomial.legendre.leggauss(GAUSS_PER_CELL)
        h = self.domain.h
        left = self.domain.r[:-1]
        nodes = (left[:, None] + h / 2.0 * (xg[None, :] + 1.0)).ravel()
        weights = np.tile(wg * h / 2.0, self.domain.n_cells)
        return nodes, weights

    @property
    def quad_nodes(self) -> np.ndarray:
        return self._quad[0]

    @cached_property
    def quad_weights_radial(self) -> np.ndarray:
        """Gauss weights times sigma * r^(d-1)."""
        nodes, weights = self._quad
        return weights * self.domain.sigma * nodes ** (self.domain.dim - 1)

    @cached_property
    def modes_q(self) -> np.ndarray:
        """cos(n pi r) at the quadrature nodes, shape (n_modes, Q)."""
        n = np.arange(self.n_modes)[:, None]
        return np.cos(n * np.pi * self.quad_nodes[None, :])

    @cached_property
    def dmodes_q(self) -> np.ndarray:
        """d/dr cos(n pi r) at the quadrature nodes."""
        n = np.arange(self.n_modes)[:, None]
        return -(n * np.pi) * np.sin(n * np.pi * self.quad_nodes[None, :])

    @cached_property
    def modes_grid(self) -> np.ndarray:
        """Mode values on the profile grid, shape (n_modes, N+1)."""
        n = np.arange(self.n_modes)[:, None]
        return np.cos(n * np.pi * self.domain.r[None, :])

    @cached_property
    def mass_matrix(self) -> np.ndarray:
        C = self.modes_q
        M = (C * self.quad_weights_radial[None, :]) @ C.T
        return 0.5 * (M + M.T)

    @cached_property
    def mode_integrals(self) -> np.ndarray:
        """int c_n over Omega, the coefficient-space mass-conservation vector."""
        return self.modes_q @ self.quad_weights_radial

    def weighted_gram(self, coeff_q: np.ndarray, derivative: bool = False) -> np.ndarray:
        """Gram matrix of modes (or mode derivatives) against a coefficient field."""
        B = self.dmodes_q if derivative else self.modes_q
        G = (B * (coeff_q * self.quad_weights_radial)[None, :]) @ B.T
        return 0.5 * (G + G.T)

    def project(self, values_grid: np.ndarray) -> np.ndarray:
        """L2(Omega) projection of nodal values onto the basis coefficients."""
        f_q = CubicSpline(self.domain.r, values_grid)(self.quad_nodes)
        b = self.modes_q @ (self.quad_weights_radial * f_q)
        return np.linalg.solve(self.mass_matrix, b)

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.modes_grid


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray              # of -H_D restricted to {int u = 0}
    mu1: float
    dynamically_stable: bool
    self_adjoint_residual: float | None = None
    kernel_residual: float | None = None
    indefinite_inner_form: bool | None = None


def _spline_q(basis: SpectralBasis, values: np.ndarray) -> np.ndarray:
    return CubicSpline(basis.domain.r, values)(basis.quad_nodes)


def assemble_HD(profile: RadialProfile, params: Params, model: Model,
                basis: SpectralBasis) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin matrices (A, M2) with A the matrix of -H_D, M2 the block Gram.

    Generalized eigenpairs of (A, M2) are the mu of -H_D (u,v) = mu (u,v).
    """
    rho_q = rho_of_phi(_spline_q(basis, profile.phi))
    g_q = rho_q * (1.0 - rho_q)
    if g_q.min() < 1e-14:
        raise ValueError("rho*(1-rho) degenerate; H_D assembly undefined")
    dD_q = _spline_q(basis, profile.dphi)
    h_q = eval_h(model, rho_q)

    K = basis.weighted_gram(np.ones_like(g_q), derivative=True)
    G = basis.weighted_gram(g_q, derivative=True)
    Mm = basis.mass_matrix
    Hm = (basis.modes_q * (h_q * basis.quad_weights_radial)[None, :]) @ basis.modes_q.T
    # drift coupling: rows test-function derivative, columns trial function
    X = (1.0 - 2.0 * rho_q) * dD_q * basis.quad_weights_radial
    S = (basis.dmodes_q * X[None, :]) @ basis.modes_q.T

    n = basis.n_modes
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = K - S
    A[:n, n:] = -G
    A[n:, :n] = -Hm
    A[n:, n:] = params.kappa * K + params.delta * Mm
    M2 = np.zeros((2 * n, 2 * n))
    M2[:n, :n] = Mm
    M2[n:, n:] = Mm
    return A, M2


def dynamical_spectrum(profile: RadialProfile, params: Params, model: Model,
                       basis: SpectralBasis) -> StabilityReport:
    """Spectrum of -H_D restricted to zero-mean density perturbations."""
    A, M2 = assemble_HD(profile, params, model, basis)
    n = basis.n_modes
    Z = sla.null_space(basis.mode_integrals[None, :])
    R = np.zeros((2 * n, 2 * n - 1))
    R[:n, : n - 1] = Z
    R[n:, n - 1:] = np.eye(n)
    Ared = R.T @ A @ R
    Mred = R.T @ M2 @ R
    try:
        vals = sla.eig(Ared, Mred, right=False)
    except sla.LinAlgError as exc:   # pragma: no cover - eigensolver failure
        raise SpectrumError(f"generalized eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise SpectrumError("eigensolver returned non-finite eigenvalues")
    order = np.lexsort((np.abs(vals.imag), vals.real))
    vals = vals[order]
    mu1 = float(vals[0].real)
    return StabilityReport(eigenvalues=vals, mu1=mu1, dynamically_stable=mu1 > 0.0)


def kernel_check(profile: RadialProfile, params: Params, model: Model,
                 v: np.ndarray, basis: SpectralBasis) -> float:
    """Relative basis-norm residual of H_D applied to the pair (rho(1-rho)v, v)."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("kernel_check needs a nonzero candidate direction")
    g = g_weight(profile)
    x = np.concatenate([basis.project(g * v), basis.project(v)])
    A, M2 = assemble_HD(profile, params, model, basis)
    y = np.linalg.solve(M2, A @ x)
    num = float(np.sqrt(y @ M2 @ y))
    den = float(np.sqrt(x @ M2 @ x))
    return num / den


def selfadjoint_residual(profile: RadialProfile, params: Params, model: Model,
                         basis: SpectralBasis, n_pairs: int = 50,
                         seed: int = 0) -> tuple[float, bool]:
    """Max symmetry defect of H_D in the <<.,.>> form over random smooth pairs.

    Returns (residual, indefinite_flag); refuses Model I, for which no
    self-adjointness identity holds.
    """
    if model is not Model.II:
        raise ValueError("H_D self-adjointness is a Model II property")
    domain = basis.domain
    rng = np.random.default_rng(seed)
    n = basis.n_modes
    decay = 1.0 / (1.0 + np.arange(n)) ** 2
    indefinite = False
    worst = 0.0
    for _ in range(n_pairs):
        pairs = []
        for _ in range(2):
            cu = rng.standard_normal(n) * decay
            cv = rng.standard_normal(n) * decay
            pairs.append(PairField(u=basis.evaluate(cu), v=basis.evaluate(cv)))
        p1, p2 = pairs
        Hp1 = apply_HD(profile, params, model, p1, domain)
        Hp2 = apply_HD(profile, params, model, p2, domain)
        a = inner_form(p1, Hp2, profile, params, domain)
        b = inner_form(Hp1, p2, profile, params, domain)
        q1 = inner_form(p1, p1, profile, params, domain)
        q2 = inner_form(p2, p2, profile, params, domain)
        if q1 < 0.0 or q2 < 0.0:
            indefinite = True
        norm = np.sqrt(abs(q1)) * np.sqrt(abs(q2))
        if norm > 0:
            worst = max(worst, abs(a - b) / norm)
    return worst, indefinite

"""Model definitions: nonlinearities, parameters, radial domains and Neumann spectra.

Two crowd-motion systems are supported. Both evolve a density ``rho`` in (0,1)
and a potential ``D``; stationary states reduce, after writing
``rho = 1/(1+exp(-phi))`` with ``phi = D - phi0``, to the radial problem

    -kappa * lap(phi) + delta * (phi + phi0) - f(phi) = 0,   phi'(0) = phi'(1) = 0,

where the pair (F, f = F') encodes the model:

* Model I :  F(phi) = 1/(1+exp(-phi)),      f(phi) = rho*(1-rho)
* Model II:  F(phi) = log(1+exp(phi)),      f(phi) = rho

and f'(phi) = rho*(1-rho)*h(rho) with h = 1-2*rho (Model I) or h = 1 (Model II).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit, jn_zeros, jnp_zeros


class Model(enum.Enum):
    """Which source term feeds the potential equation: rho*(1-rho) (I) or rho (II)."""

    I = "I"
    II = "II"

    @classmethod
    def parse(cls, text: str) -> "Model":
        key = str(text).strip().upper()
        if key in ("I", "1", "MODELI"):
            return cls.I
        if key in ("II", "2", "MODELII"):
            return cls.II
        raise ValueError(f"unknown model {text!r}; expected 'I' or 'II'")


@dataclass(frozen=True)
class Params:
    """Diffusivity kappa and decay rate delta of the potential equation."""

    kappa: float
    delta: float

    def __post_init__(self):
        if not (self.kappa > 0):
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not (self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")


def rho_of_phi(phi):
    """Logistic density 1/(1+exp(-phi)), overflow-safe for any float input."""
    return expit(phi)


def eval_F(model: Model, phi):
    if model is Model.I:
        return expit(phi)
    # softplus, stable on both tails
    return np.logaddexp(0.0, phi)


def eval_f(model: Model, phi):
    """f = F'. Model I: rho*(1-rho); Model II: rho."""
    if model is Model.I:
        return expit(phi) * expit(-phi)
    return expit(phi)


def eval_h(model: Model, rho):
    """Factor h(rho) in f'(phi) = rho*(1-rho)*h(rho)."""
    if model is Model.I:
        return 1.0 - 2.0 * np.asarray(rho)
    return np.ones_like(np.asarray(rho, dtype=float))


def g_source(model: Model, rho):
    """Source g(rho) of the potential equation: rho*(1-rho) (I) or rho (II)."""
    rho = np.asarray(rho, dtype=float)
    if model is Model.I:
        return rho * (1.0 - rho)
    return rho


def eval_fprime(model: Model, phi):
    rho = expit(phi)
    g = rho * expit(-np.asarray(phi))
    if model is Model.I:
        return g * (1.0 - 2.0 * rho)
    return g


def max_fprime(model: Model) -> float:
    """max over phi of f'(phi): 1/(6*sqrt(3)) for Model I, 1/4 for Model II."""
    if model is Model.I:
        return 1.0 / (6.0 * math.sqrt(3.0))
    return 0.25


def argmax_fprime(model: Model) -> float:
    """The phi achieving max f'. Model I: log(2-sqrt(3)); Model II: 0."""
    if model is Model.I:
        return math.log(2.0 - math.sqrt(3.0))
    return 0.0


def k_of(model: Model, params: Params, phi):
    """k(phi) = f(phi)/delta - phi; constant solutions solve k(phi) = phi0."""
    return eval_f(model, phi) / params.delta - np.asarray(phi, dtype=float)


def k_prime(model: Model, params: Params, phi):
    return eval_fprime(model, phi) / params.delta - 1.0


@dataclass(eq=False)
class Domain:
    """Radial domain: the interval (0,1) for d=1 or the unit disk for d=2.

    Carries the uniform profile grid together with two quadrature rules on
    [0,1] against the radial weight r^(d-1):

    * ``quad_w``  -- composite Simpson weights (scalar integrals: mass, energy);
    * ``fv_w``    -- finite-volume cell measures (discrete operators and the
      inner products in which they are exactly self-adjoint).

    ``n_cells`` must be even so Simpson applies.
    """

    dim: int
    n_cells: int = 1024

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n_cells < 4 or self.n_cells % 2:
            raise ValueError("n_cells must be even and >= 4")

    @property
    def sigma(self) -> float:
        """Surface factor: integrals over Omega are sigma * int_0^1 (.) r^(d-1) dr."""
        return 1.0 if self.dim == 1 else 2.0 * math.pi

    @property
    def volume(self) -> float:
        return 1.0 if self.dim == 1 else math.pi

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @cached_property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    @cached_property
    def quad_w(self) -> np.ndarray:
        """Simpson weights times sigma * r^(d-1)."""
        n = self.n_cells
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= self.h / 3.0
        return w * self.sigma * self.r ** (self.dim - 1)

    @cached_property
    def fv_w(self) -> np.ndarray:
        """Finite-volume node measures: integral of sigma*r^(d-1) over each dual cell."""
        h, r = self.h, self.r
        if self.dim == 1:
            w = np.full(self.n_cells + 1, h)
            w[0] = w[-1] = h / 2.0
            return w
        w = 2.0 * math.pi * r * h
        w[0] = 2.0 * math.pi * h**2 / 8.0
        w[-1] = 2.0 * math.pi * (h / 2.0) * (1.0 - h / 4.0)
        return w

    @cached_property
    def face_r(self) -> np.ndarray:
        return self.r[:-1] + self.h / 2.0

    @cached_property
    def face_w(self) -> np.ndarray:
        """Per-face gradient quadrature weights sigma * r_face^(d-1) * h."""
        return self.sigma * self.face_r ** (self.dim - 1) * self.h

    def integrate(self, values: np.ndarray) -> float:
        """Simpson integral of a nodal function over Omega (radial measure)."""
        return float(np.dot(self.quad_w, values))

    def integrate_fv(self, values: np.ndarray) -> float:
        return float(np.dot(self.fv_w, values))


# Zeros of J1 (= zeros of J0') and of J1', cached lazily; scipy provides them
# to full double precision.
_J1_ZEROS: np.ndarray = np.array([])


def _j1_zeros(n: int) -> np.ndarray:
    global _J1_ZEROS
    if _J1_ZEROS.size < n:
        _J1_ZEROS = jn_zeros(1, max(n, 64))
    return _J1_ZEROS


def neumann_eigenvalue(domain: Domain, n: int) -> float:
    """n-th radial Neumann eigenvalue of -Laplace on the domain.

    d=1: (n*pi)^2. d=2: square of the n-th positive zero of J0' (lambda_0 = 0).
    """
    if n < 0:
        raise ValueError("mode index must be >= 0")
    if n == 0:
        return 0.0
    if domain.dim == 1:
        return float((n * math.pi) ** 2)
    return float(_j1_zeros(n)[n - 1] ** 2)


def disk_nonradial_lambda10() -> float:
    """First non-radial Neumann eigenvalue of the unit disk, (j'_{1,1})^2 ~ 3.39.

    Reported for comparison only: the radial solver never uses it.
    """
    return float(jnp_zeros(1, 1)[0] ** 2)

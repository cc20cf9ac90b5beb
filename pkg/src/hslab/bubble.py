"""The extremal family c*U^lam, its dilation generator and the scaling operator T.

Convention: U^lam(r) = lam^{(N-2)/2} U(lam r), so large lam concentrates the
bubble near the origin.  In log radius y = log(lam r) every member has the form

    U^lam(r) = K r^{-(N-2)/2} (2 cosh(kappa y))^{-nu0},

which is what all evaluations below use (it never overflows, and the
derivatives come out as short closed forms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .params import (
    ProblemParams,
    el_normalization_constant,
    unit_norm_constant,
)
from .radial import RadialFunction, uniform_grid_for, write_csv

EULER_LAGRANGE = "euler_lagrange"
UNIT_GAMMA_NORM = "unit_gamma_norm"
NORMALIZATIONS = (EULER_LAGRANGE, UNIT_GAMMA_NORM)

# core window half-width in units of 1/kappa (tanh is saturated to 1e-5 there)
_CORE = 6.0


def normalization_constant(params: ProblemParams, normalization: str) -> float:
    if normalization == EULER_LAGRANGE:
        return el_normalization_constant(params)
    if normalization == UNIT_GAMMA_NORM:
        return unit_norm_constant(params)
    raise DomainError(f"unknown normalization {normalization!r}; use one of {NORMALIZATIONS}")


def _log2cosh(z):
    a = np.abs(z)
    return a + np.log1p(np.exp(-2.0 * a))


def _sech2(z):
    a = np.abs(z)
    e = np.exp(-2.0 * a)
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class Bubble:
    params: ProblemParams
    lam: float = 1.0
    coeff: float = 1.0
    normalization: str = EULER_LAGRANGE

    def __post_init__(self):
        if not isinstance(self.params, ProblemParams):
            raise DomainError("Bubble needs a ProblemParams instance")
        lam, c = float(self.lam), float(self.coeff)
        if not (math.isfinite(lam) and lam > 0):
            raise DomainError(f"lambda must be positive and finite, got {self.lam!r}")
        if not math.isfinite(c) or c == 0.0:
            raise DomainError(f"coefficient must be finite and nonzero, got {self.coeff!r}")
        if self.normalization not in NORMALIZATIONS:
            raise DomainError(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "coeff", c)

    # -- scalars ------------------------------------------------------
    @property
    def base_constant(self) -> float:
        return normalization_constant(self.params, self.normalization)

    @property
    def prefactor(self) -> float:
        return self.coeff * self.base_constant

    @property
    def center(self) -> float:
        """Log radius where the profile switches between its two power laws."""
        return -math.log(self.lam)

    # -- evaluation ---------------------------------------------------
    def _y(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("bubbles are evaluated at r > 0 only")
        return r, np.log(self.lam * r)

    def log_abs(self, r):
        """log |c U^lam(r)|, finite for any r > 0."""
        p = self.params
        r, y = self._y(r)
        out = (
            math.log(abs(self.prefactor))
            - 0.5 * (p.N - 2) * np.log(r)
            - p.nu0 * _log2cosh(p.kappa * y)
        )
        return out if out.ndim else float(out)

    def eval(self, r):
        v = np.sign(self.coeff) * np.exp(self.log_abs(r))
        return v if np.ndim(v) else float(v)

    __call__ = eval

    def _g(self, y):
        # d log U / d log r, and its y-derivative
        p = self.params
        ky = p.kappa * y
        g = -0.5 * (p.N - 2) - p.epsilon * np.tanh(ky)
        gp = -p.epsilon * p.kappa * _sech2(ky)
        return g, gp

    def derivative(self, r):
        r, y = self._y(r)
        g, _ = self._g(y)
        return self.eval(r) * g / r

    def second_derivative(self, r):
        r, y = self._y(r)
        g, gp = self._g(y)
        return self.eval(r) * (g * g + gp - g) / r**2

    def as_radial(self) -> RadialFunction:
        p = self.params
        w = _CORE / p.kappa
        return RadialFunction.closed_form(
            self.eval,
            self.derivative,
            self.second_derivative,
            sector=0,
            decay=(p.beta_minus, p.beta_plus),
            window=(self.center - w, self.center + w),
            meta={"bubble": self.describe()},
        )

    # -- tangent direction --------------------------------------------
    def tangent(self) -> RadialFunction:
        """V = d/dlam (c U^lam) at the current lam, with exact derivatives."""
        p = self.params
        eps, kap, lam = p.epsilon, p.kappa, self.lam

        def hs(y):
            ky = kap * y
            th = np.tanh(ky)
            s2 = _sech2(ky)
            return -eps * th, -eps * kap * s2, 2.0 * eps * kap * kap * s2 * th

        def V(r):
            r, y = self._y(r)
            h, _, _ = hs(y)
            return self.eval(r) * h / lam

        def dV(r):
            r, y = self._y(r)
            g, _ = self._g(y)
            h, h1, _ = hs(y)
            return self.eval(r) * (g * h + h1) / (lam * r)

        def d2V(r):
            r, y = self._y(r)
            g, g1 = self._g(y)
            h, h1, h2 = hs(y)
            q = g * h + h1
            q1 = g1 * h + g * h1 + h2
            return self.eval(r) * (g * q + q1 - q) / (lam * r * r)

        w = _CORE / kap
        return RadialFunction.closed_form(
            V, dV, d2V, sector=0,
            decay=(p.beta_minus, p.beta_plus),
            window=(self.center - w, self.center + w),
            meta={"tangent_of": self.describe()},
        )

    # -- conversions --------------------------------------------------
    def with_lambda(self, lam: float) -> "Bubble":
        return replace(self, lam=lam)

    def with_coeff(self, coeff: float) -> "Bubble":
        return replace(self, coeff=coeff)

    def to_normalization(self, normalization: str) -> "Bubble":
        """Same function written with the other base constant."""
        if normalization == self.normalization:
            return self
        k_new = normalization_constant(self.params, normalization)
        return replace(
            self, coeff=self.coeff * self.base_constant / k_new, normalization=normalization
        )

    def describe(self) -> str:
        p = self.params
        return (
            f"bubble N={p.N} gamma={p.gamma!r} s={p.s!r} lambda={self.lam!r}"
            f" coeff={self.coeff!r} norm={self.normalization}"
        )

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "lambda": self.lam,
            "coeff": self.coeff,
            "normalization": self.normalization,
        }


@dataclass(frozen=True)
class ManifoldPoint:
    """A point c*U^lam of the extremal manifold."""

    bubble: Bubble

    @property
    def c(self) -> float:
        return self.bubble.coeff

    @property
    def lam(self) -> float:
        return self.bubble.lam

    def to_dict(self) -> dict:
        return self.bubble.to_dict()


def tangent_generator(b: Bubble) -> RadialFunction:
    return b.tangent()


def eval_bubble(b: Bubble, r):
    return b.eval(r)


def _dim(params_or_N) -> int:
    if isinstance(params_or_N, ProblemParams):
        return params_or_N.N
    n = int(params_or_N)
    if n < 3:
        raise DomainError("dimension must be >= 3")
    return n


def apply_T(lam: float, f: RadialFunction, params_or_N) -> RadialFunction:
    """T_lam f(r) = lam^{-(N-2)/2} f(r/lam).

    Closed forms are wrapped exactly; sampled functions keep their values
    and move their grid by log(lam).  With the internal bubble convention,
    T_lam U^mu = U^{mu/lam}.
    """
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError("T_lambda needs lambda > 0")
    N = _dim(params_or_N)
    if lam == 1.0:
        return f
    a = lam ** (-(N - 2) / 2.0)
    shift = math.log(lam)
    if f.kind == "sampled":
        return RadialFunction(
            t=f.t + shift,
            values=a * f.values,
            dvalues=(a / lam) * f.dvalues,
            d2values=(a / lam**2) * f.d2values,
            sector=f.sector,
            decay=f.decay,
            meta=f.meta,
        )
    deriv = (lambda r: (a / lam) * f.derivative(np.asarray(r) / lam))
    deriv2 = (lambda r: (a / lam**2) * f.second_derivative(np.asarray(r) / lam))
    return RadialFunction.closed_form(
        lambda r: a * f(np.asarray(r) / lam),
        deriv,
        deriv2,
        sector=f.sector,
        decay=f.decay,
        window=(f.window[0] + shift, f.window[1] + shift),
        meta=f.meta,
    )


def sample_bubble(b: Bubble, h: float = 0.01) -> RadialFunction:
    """The bubble on a uniform log grid wide enough for its energy integrals."""
    f = b.as_radial()
    t = uniform_grid_for([f], b.params.N, h=h)
    r = np.exp(t)
    return RadialFunction(
        t=t, values=b.eval(r), dvalues=b.derivative(r), d2values=b.second_derivative(r),
        sector=0, decay=f.decay, meta=f.meta,
    )


def write_bubble_csv(b: Bubble, path=None, h: float = 0.01) -> str:
    return write_csv(sample_bubble(b, h), path, comments=[b.describe()])

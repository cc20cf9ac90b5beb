"""Problem parameters (N, gamma, s), derived exponents and closed-form constants."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError

# Lanczos approximation, g = 7, nine terms (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _gamma_scalar(x: float) -> float:
    if x < 0.5:
        # reflection keeps the series in its accurate range
        return math.pi / (math.sin(math.pi * x) * _gamma_scalar(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split the power so that x up to ~170 does not overflow
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * half * math.exp(-t) * acc


def gamma_fn(x):
    """Euler Gamma function for positive arguments (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"gamma_fn needs positive finite arguments, got {x!r}")
    if arr.ndim == 0:
        return _gamma_scalar(float(arr))
    return np.vectorize(_gamma_scalar, otypes=[float])(arr)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / gamma_fn(n / 2.0)


@dataclass(frozen=True)
class DerivedConstants:
    epsilon: float
    beta_minus: float
    beta_plus: float
    two_star_s: float
    sphere_area: float
    omega_N: float


@dataclass(frozen=True)
class ProblemParams:
    """Dimension ``N``, Hardy coefficient ``gamma`` and singular exponent ``s``.

    The admissible region is N >= 3, 0 < gamma < (N-2)^2/4, 0 < s < 2.  With
    ``reference=True`` the closed endpoints gamma = 0 and s = 0 are also
    accepted (Sobolev / pure Hardy-Sobolev cross-checks).
    """

    N: int
    gamma: float
    s: float
    reference: bool = field(default=False, compare=True)

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "s", float(self.s))
        g, s = self.gamma, self.s
        if not (math.isfinite(g) and math.isfinite(s)):
            raise DomainError("gamma and s must be finite")
        gh = self.gamma_H
        if self.reference:
            if not 0.0 <= g < gh:
                raise DomainError(f"reference mode needs 0 <= gamma < {gh}, got {g}")
            if not 0.0 <= s < 2.0:
                raise DomainError(f"reference mode needs 0 <= s < 2, got {s}")
        else:
            if not 0.0 < g < gh:
                raise DomainError(
                    f"gamma must satisfy 0 < gamma < gamma_H = {gh}, got {g}"
                    " (use reference mode for gamma = 0)"
                )
            if not 0.0 < s < 2.0:
                raise DomainError(
                    f"s must satisfy 0 < s < 2, got {s} (use reference mode for s = 0)"
                )

    @property
    def gamma_H(self) -> float:
        return (self.N - 2) ** 2 / 4.0

    @property
    def is_boundary_case(self) -> bool:
        return self.gamma == 0.0 or self.s == 0.0

    @cached_property
    def constants(self) -> DerivedConstants:
        N, s = self.N, self.s
        eps = math.sqrt(self.gamma_H - self.gamma)
        return DerivedConstants(
            epsilon=eps,
            beta_minus=(N - 2) / 2.0 - eps,
            beta_plus=(N - 2) / 2.0 + eps,
            two_star_s=2.0 * (N - s) / (N - 2),
            sphere_area=sphere_area(N),
            omega_N=sphere_area(N + 1),
        )

    @property
    def epsilon(self) -> float:
        return self.constants.epsilon

    @property
    def beta_minus(self) -> float:
        return self.constants.beta_minus

    @property
    def beta_plus(self) -> float:
        return self.constants.beta_plus

    @property
    def p(self) -> float:
        """The critical exponent 2*(s)."""
        return self.constants.two_star_s

    @property
    def area(self) -> float:
        return self.constants.sphere_area

    @property
    def nu0(self) -> float:
        """Power (N-2)/(2-s) in the bubble profile."""
        return (self.N - 2) / (2.0 - self.s)

    @property
    def kappa(self) -> float:
        """Log-radius rate eps*(2-s)/(N-2) of the bubble's sech profile."""
        return self.epsilon * (2.0 - self.s) / (self.N - 2)

    def angular_eigenvalue(self, k: int) -> float:
        return float(k * k + (self.N - 2) * k)

    def harmonic_multiplicity(self, k: int) -> int:
        N = self.N
        if k == 0:
            return 1
        if k == 1:
            return N
        return math.comb(N + k - 1, k) - math.comb(N + k - 3, k - 2)

    def sector_epsilon(self, k: int) -> float:
        """Indicial half-gap for the sector-k operator (coefficient gamma - lambda_k)."""
        return math.sqrt(self.gamma_H - self.gamma + self.angular_eigenvalue(k))

    def to_dict(self) -> dict:
        return {"N": self.N, "gamma": self.gamma, "s": self.s, "reference": self.reference}


def _check(p: ProblemParams) -> ProblemParams:
    if not isinstance(p, ProblemParams):
        raise DomainError(f"expected ProblemParams, got {type(p).__name__}")
    return p


def sobolev_constant(N: int) -> float:
    """S(R^N) = N(N-2) omega_N^{2/N} / 4."""
    return N * (N - 2) * sphere_area(N + 1) ** (2.0 / N) / 4.0


def _mu_zero_gamma(N: int, s: float) -> float:
    # gamma = 0, 0 < s < 2: the classical closed form, single Gamma in the denominator
    ratio = gamma_fn((N - s) / (2 - s)) ** 2 / gamma_fn(2 * (N - s) / (2 - s))
    return (N - 2) * (N - s) * (sphere_area(N) / (2 - s) * ratio) ** ((2 - s) / (N - s))


def _d_s(N: int, s: float) -> float:
    p = 2.0 * (N - s) / (N - 2)
    g = (
        gamma_fn((N - s) / (2 - s))
        * gamma_fn((N + 2 - 2 * s) / (2 - s))
        / gamma_fn(2 * (N - s) / (2 - s))
    )
    e = (2 - s) / (N - s)
    return sphere_area(N) ** e * (p / 2.0) ** (2.0 / p) * g**e


def best_constant(p: ProblemParams) -> float:
    """Sharp constant mu_{gamma,s}(R^N) of the Hardy-Sobolev inequality."""
    p = _check(p)
    N, g, s = p.N, p.gamma, p.s
    if g == 0.0 and s == 0.0:
        return sobolev_constant(N)
    if g == 0.0:
        return _mu_zero_gamma(N, s)
    return ((N - 2) ** 2 - 4.0 * g) ** (1.0 / p.p + 0.5) * _d_s(N, s)


def el_normalization_constant(p: ProblemParams) -> float:
    """C_{N,gamma,s}: makes the bubble solve -Lap W - gamma W/|x|^2 = W^{p-1}/|x|^s."""
    p = _check(p)
    return (4.0 * (p.N - p.s) / (p.N - 2) * p.epsilon**2) ** (1.0 / (p.p - 2.0))


def bubble_energy(p: ProblemParams) -> float:
    """||U||_gamma^2 = int U^p/|x|^s for the Euler-Lagrange normalized bubble.

    Equals mu^{(N-s)/(2-s)}.
    """
    return best_constant(p) ** ((p.N - p.s) / (2.0 - p.s))


def unit_norm_constant(p: ProblemParams) -> float:
    """Prefactor making ||U||_gamma = 1."""
    return el_normalization_constant(p) / math.sqrt(bubble_energy(p))


def params_asdict(p: ProblemParams) -> dict:
    d = p.to_dict()
    d.update(asdict(p.constants))
    d["mu"] = best_constant(p)
    d["C_el"] = el_normalization_constant(p)
    return d

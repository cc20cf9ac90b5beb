"""Norms, deficit, energy, Euler-Lagrange residual and the dual norm.

Every function takes a RadialFunction (one sector, profile R(r) times a real
zonal harmonic with mean square one on the sphere) together with the
ProblemParams.  The deficit and the weighted Lebesgue norm also accept a
MultiSector sum; the angular integral is then done by Gauss-Jacobi
quadrature in cos(theta).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_gegenbauer, roots_jacobi

from .errors import AccuracyError, DomainError, ResolutionError
from .params import ProblemParams, best_constant
from .radial import (
    GL_ORDER,
    MultiSector,
    RadialFunction,
    _GL_W,
    _GL_X,
    _tail_rate,
    as_components,
    quadrature_nodes,
    trapezoid_with_tails,
    uniform_grid_for,
)

# ---------------------------------------------------------------------------
# zonal harmonics


@lru_cache(maxsize=None)
def _sphere_rule(N: int, n: int):
    """Nodes x = cos(theta) and weights (summing to 1) for averages over S^{N-1}."""
    a = (N - 3) / 2.0
    x, w = roots_jacobi(n, a, a)
    return x, w / w.sum()


@lru_cache(maxsize=None)
def _zonal_scale(N: int, k: int) -> float:
    if k == 0:
        return 1.0
    x, w = _sphere_rule(N, max(64, 2 * k + 8))
    c = eval_gegenbauer(k, (N - 2) / 2.0, x)
    return 1.0 / math.sqrt(float(np.dot(w, c * c)))


def zonal_harmonic(N: int, k: int, x):
    """Real zonal harmonic of order k at x = cos(theta), mean square one."""
    if k == 0:
        return np.ones_like(np.asarray(x, float))
    return _zonal_scale(N, k) * eval_gegenbauer(k, (N - 2) / 2.0, x)


@lru_cache(maxsize=None)
def angular_lp_factor(N: int, k: int, p: float) -> float:
    """Spherical mean of |Y_k|^p for the normalized zonal harmonic."""
    if k == 0:
        return 1.0
    x, w = _sphere_rule(N, 2000)
    return float(np.dot(w, np.abs(zonal_harmonic(N, k, x)) ** p))


# ---------------------------------------------------------------------------
# helpers


def _check(params):
    if not isinstance(params, ProblemParams):
        raise DomainError(f"expected ProblemParams, got {type(params).__name__}")
    return params


def _single(u) -> RadialFunction:
    if not isinstance(u, RadialFunction):
        raise DomainError(f"expected a RadialFunction, got {type(u).__name__}")
    return u


def _energy_density(u: RadialFunction, params, nodes, gamma):
    R, dR, _ = u.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(u))
    r = np.exp(nodes.t)
    lam_k = params.angular_eigenvalue(u.sector)
    return (dR * dR * r * r + (lam_k - gamma) * R * R) * r ** (params.N - 2)


def _finite(x, what):
    if not math.isfinite(x):
        raise AccuracyError(f"{what} is not finite", estimate=x)
    return x


# ---------------------------------------------------------------------------
# quadratic forms


def gamma_norm_sq(u, params: ProblemParams, gamma: float | None = None) -> float:
    """||u||_gamma^2 = int |grad u|^2 - gamma int u^2/|x|^2.

    ``gamma`` overrides the Hardy coefficient (``gamma=0`` gives the plain
    Dirichlet energy used in the norm-equivalence check).
    """
    params = _check(params)
    g = params.gamma if gamma is None else float(gamma)
    total = 0.0
    for c in as_components(u):
        nodes = quadrature_nodes([c], params.N)
        dens = _energy_density(c, params, nodes, g)
        total += nodes.integrate(dens)
    return _finite(params.area * total, "gamma norm")


def inner_gamma(u, v, params: ProblemParams) -> float:
    params = _check(params)
    u, v = _single(u), _single(v)
    if u.sector != v.sector:
        return 0.0
    nodes = quadrature_nodes([u, v], params.N)
    Ru, dRu, _ = u.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(u))
    Rv, dRv, _ = v.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(v))
    r = np.exp(nodes.t)
    lam_k = params.angular_eigenvalue(u.sector)
    dens = (dRu * dRv * r * r + (lam_k - params.gamma) * Ru * Rv) * r ** (params.N - 2)
    return _finite(params.area * nodes.integrate(dens), "inner product")


def weighted_integral(u, params: ProblemParams, power: float | None = None) -> float:
    """int |u|^q / |x|^s dx with q = 2*(s) by default."""
    params = _check(params)
    q = params.p if power is None else float(power)
    comps = as_components(u)
    N, s = params.N, params.s
    if len(comps) == 1:
        c = comps[0]
        nodes = quadrature_nodes([c], N)
        R, _, _ = c.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(c))
        r = np.exp(nodes.t)
        val = nodes.integrate(np.abs(R) ** q * r ** (N - s))
        val *= angular_lp_factor(N, c.sector, q)
        return _finite(params.area * val, "weighted integral")
    nodes = quadrature_nodes(list(comps), N)
    x, w = _sphere_rule(N, 64)
    field = np.zeros((len(nodes.t), len(x)))
    for c in comps:
        R, _, _ = c.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(c))
        field += R[:, None] * zonal_harmonic(N, c.sector, x)[None, :]
    ang = (np.abs(field) ** q) @ w
    r = np.exp(nodes.t)
    return _finite(params.area * nodes.integrate(ang * r ** (N - s)), "weighted integral")


def hs_norm(u, params: ProblemParams) -> float:
    """||u|| in L^{2*(s)}(R^N, |x|^{-s} dx)."""
    return weighted_integral(u, params) ** (1.0 / params.p)


@dataclass(frozen=True)
class DeficitReport:
    gamma_norm_sq: float
    hs_norm: float
    deficit: float
    mu: float
    params: ProblemParams

    @property
    def relative_deficit(self) -> float:
        return self.deficit / self.gamma_norm_sq if self.gamma_norm_sq else 0.0

    def to_dict(self) -> dict:
        return {
            "gamma_norm_sq": self.gamma_norm_sq,
            "hs_norm": self.hs_norm,
            "deficit": self.deficit,
            "mu": self.mu,
            "params": self.params.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def deficit(u, params: ProblemParams) -> DeficitReport:
    """||u||_gamma^2 - mu ||u||^2_{L^{2*(s)}(|x|^{-s})}."""
    params = _check(params)
    nsq = gamma_norm_sq(u, params)
    hs = hs_norm(u, params)
    mu = best_constant(params)
    return DeficitReport(nsq, hs, nsq - mu * hs * hs, mu, params)


def energy(u, params: ProblemParams) -> float:
    params = _check(params)
    return 0.5 * gamma_norm_sq(u, params) - weighted_integral(u, params) / params.p


def rayleigh_quotient(u, params: ProblemParams) -> float:
    return gamma_norm_sq(u, params) / hs_norm(u, params) ** 2


# ---------------------------------------------------------------------------
# Euler-Lagrange residual


def el_residual(u, params: ProblemParams, weight: float = 1.0, h: float = 0.01) -> RadialFunction:
    """f = Delta u + gamma u/|x|^2 + weight * |u|^{2*(s)-2} u / |x|^s, sampled.

    Sampled inputs keep their grid; closed forms are evaluated (with their
    exact derivatives) on a uniform log grid of step ``h``.  ``weight`` lets
    the unit-norm equation (weight mu^{2*(s)/2}) be checked as well.
    """
    params = _check(params)
    u = _single(u)
    if u.sector != 0:
        raise DomainError("the Euler-Lagrange residual is defined for radial functions")
    N = params.N
    if u.kind == "sampled":
        if len(u.t) < 128:
            raise ResolutionError("el_residual needs at least 128 samples", estimate=len(u.t))
        t = u.t
        R, dR, d2R = u.values, u.dvalues, u.d2values
    else:
        t = uniform_grid_for([u], N, h=h)
        R, dR, d2R = u.at_nodes(t, need_d2=True)
    r = np.exp(t)
    f = (
        d2R
        + (N - 1) * dR / r
        + params.gamma * R / r**2
        + weight * np.abs(R) ** (params.p - 2) * R / r**params.s
    )
    decay = None
    if u.decay is not None:
        a0, ainf = u.decay
        decay = (max(a0 + 2, a0 * (params.p - 1) + params.s), ainf + 2)
    return RadialFunction(
        t=t, values=f, sector=0, decay=decay,
        meta={"nonlinearity": "|u|^(p-2) u", "weight": weight},
    )


# ---------------------------------------------------------------------------
# dual norm through the radial Green kernel


def _hermite_weights(h: float, eps: float, forward: bool):
    """int_0^h e^{-eps(h-x)} H_j(x) dx (forward) or e^{-eps x} (backward)."""
    x = 0.5 * h * (_GL_X + 1.0)
    w = 0.5 * h * _GL_W
    sx = x / h
    k = np.exp(-eps * (h - x)) if forward else np.exp(-eps * x)
    h00 = 2 * sx**3 - 3 * sx**2 + 1
    h10 = (sx**3 - 2 * sx**2 + sx) * h
    h01 = -2 * sx**3 + 3 * sx**2
    h11 = (sx**3 - sx**2) * h
    return [float(np.dot(w, k * b)) for b in (h00, h10, h01, h11)]


def _source_rates(f: RadialFunction, c: float):
    if f.decay is None:
        return None, None
    return c - f.decay[0], f.decay[1] - c


@dataclass
class RieszSolution:
    t: np.ndarray
    source: np.ndarray  # g(t) = r^{(N+2)/2} f
    phi: np.ndarray     # w = r^{-(N-2)/2} phi
    eps_k: float
    norm_sq: float
    sector: int

    def as_radial(self, N: int) -> RadialFunction:
        r = np.exp(self.t)
        return RadialFunction(
            t=self.t, values=self.phi * r ** (-(N - 2) / 2.0), sector=self.sector
        )


def riesz_solve(f, params: ProblemParams, reference: bool = False, h: float = 0.01) -> RieszSolution:
    """Solve -Delta w - (gamma - lambda_k) w/|x|^2 = f exactly in the radial class.

    With phi(t) = r^{(N-2)/2} w and g(t) = r^{(N+2)/2} f the equation reads
    -phi'' + eps_k^2 phi = g on the line, whose Green kernel is
    e^{-eps_k|t-u|}/(2 eps_k).  The convolution is done by two recursive
    sweeps with the source interpolated by cubic Hermite pieces.  With
    ``reference`` the Hardy term is dropped (plain gradient dual norm).
    """
    params = _check(params)
    f = _single(f)
    N, k = params.N, f.sector
    gam = 0.0 if reference else params.gamma
    eps_k = math.sqrt(params.gamma_H - gam + params.angular_eigenvalue(k))
    c = (N + 2) / 2.0

    if f.kind == "sampled":
        t = f.t
        if len(t) < 128:
            raise ResolutionError("dual_norm needs at least 128 samples", estimate=len(t))
        fv, fd = f.values, f.dvalues
        if np.any(np.abs(np.diff(t) - (t[1] - t[0])) > 1e-9 * (t[1] - t[0])):
            raise ResolutionError("dual_norm needs a uniform log grid")
    else:
        rho_lo, rho_hi = _source_rates(f, c)
        lo = f.window[0] - (40.0 / rho_lo if rho_lo and rho_lo > 0 else 34.0)
        hi = f.window[1] + (40.0 / rho_hi if rho_hi and rho_hi > 0 else 34.0)
        t = np.linspace(lo, hi, int(math.ceil((hi - lo) / h)) + 1)
        fv, fd, _ = f.at_nodes(t)
    r = np.exp(t)
    ect = r**c
    g = ect * fv
    gp = ect * (c * fv + r * fd)
    step = t[1] - t[0]

    rho_lo, rho_hi = _source_rates(f, c)
    # end values at round-off level (e.g. residuals of near-exact solutions)
    # carry no usable tail information and are treated as zero
    negligible = 1e-13 * float(np.max(np.abs(g)))
    for name in ("lo", "hi"):
        rate = rho_lo if name == "lo" else rho_hi
        end_val = g[0] if name == "lo" else g[-1]
        if rate is None:
            rate = _tail_rate(t, g, name)
        if (rate is None or rate <= 0) and abs(end_val) <= negligible:
            rate = math.inf
        if end_val != 0.0 and (rate is None or rate <= 0):
            raise AccuracyError(
                "source grows too fast for a finite dual norm",
                estimate=float(abs(end_val)),
            )
        if name == "lo":
            rho_lo = rate
        else:
            rho_hi = rate

    F, B = _sweeps(g, gp, step, eps_k, rho_lo, rho_hi)
    phi = (F + B) / (2.0 * eps_k)
    val = params.area * trapezoid_with_tails(t, g * phi)
    scale = params.area * trapezoid_with_tails(t, np.abs(g) * np.abs(phi))
    if val < -1e-10 * max(scale, 1e-300):
        raise AccuracyError("negative squared dual norm", estimate=val)
    return RieszSolution(t, g, phi, eps_k, max(val, 0.0), k)


def _sweeps(g, gp, h, eps, rho_lo, rho_hi):
    n = len(g)
    decay = math.exp(-eps * h)
    wf = _hermite_weights(h, eps, True)
    wb = _hermite_weights(h, eps, False)
    F = np.empty(n)
    B = np.empty(n)
    F[0] = g[0] / (eps + rho_lo) if g[0] != 0.0 else 0.0
    seg_f = wf[0] * g[:-1] + wf[1] * gp[:-1] + wf[2] * g[1:] + wf[3] * gp[1:]
    seg_b = wb[0] * g[:-1] + wb[1] * gp[:-1] + wb[2] * g[1:] + wb[3] * gp[1:]
    for i in range(1, n):
        F[i] = decay * F[i - 1] + seg_f[i - 1]
    B[-1] = g[-1] / (eps + rho_hi) if g[-1] != 0.0 else 0.0
    for i in range(n - 2, -1, -1):
        B[i] = decay * B[i + 1] + seg_b[i]
    return F, B


def dual_norm(f, params: ProblemParams, reference: bool = False) -> float:
    """Norm of f in the dual of (H^1, ||.||_gamma); ``reference`` uses the gradient norm."""
    return math.sqrt(riesz_solve(f, params, reference=reference).norm_sq)


def gamma_of(u, params: ProblemParams, **kw) -> float:
    """Gamma(u): dual norm of the Euler-Lagrange residual of u."""
    return dual_norm(el_residual(u, params, **kw), params)


__all__ = [
    "DeficitReport",
    "RieszSolution",
    "angular_lp_factor",
    "deficit",
    "dual_norm",
    "el_residual",
    "energy",
    "gamma_norm_sq",
    "gamma_of",
    "hs_norm",
    "inner_gamma",
    "rayleigh_quotient",
    "riesz_solve",
    "weighted_integral",
    "zonal_harmonic",
    "MultiSector",
    "GL_ORDER",
]

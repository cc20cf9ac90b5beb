import math

import numpy as np
import pytest

import oracles
from hslab.bubble import UNIT_GAMMA_NORM, Bubble
from hslab.errors import DomainError, ResolutionError
from hslab.functionals import (
    angular_lp_factor,
    deficit,
    dual_norm,
    el_residual,
    gamma_norm_sq,
    gamma_of,
    hs_norm,
    inner_gamma,
    rayleigh_quotient,
    riesz_solve,
    weighted_integral,
    zonal_harmonic,
)
from hslab.params import ProblemParams, best_constant
from hslab.radial import MultiSector, RadialFunction, log_grid

P = ProblemParams(4, 0.5, 1.0)


def log_bump(center, width, amp=1.0, sector=0):
    """amp * exp(-(log r - center)^2 / (2 width^2)) with exact derivatives."""

    def f(r):
        z = (np.log(r) - center) / width
        return amp * np.exp(-0.5 * z * z)

    def df(r):
        z = (np.log(r) - center) / width
        return -z / (width * r) * f(r)

    def d2f(r):
        z = (np.log(r) - center) / width
        return f(r) * ((z * z - 1) / width**2 + z / width) / r**2

    return RadialFunction.closed_form(f, df, d2f, sector=sector)


def random_bumps(seed, n=12, sector=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        k = int(rng.integers(2, 4))
        f = None
        for _ in range(k):
            b = log_bump(rng.uniform(-2, 2), rng.uniform(0.3, 1.5), rng.normal(), sector)
            f = b if f is None else f + b
        out.append(f)
    return out


@pytest.mark.parametrize("case", [(3, 0.1, 0.5), (4, 0.5, 1.0), (6, 2.0, 1.5)])
def test_unit_bubble_has_unit_norm(case):
    p = ProblemParams(*case)
    for lam in (0.1, 1.0, 10.0):
        u = Bubble(p, lam, normalization=UNIT_GAMMA_NORM).as_radial()
        assert gamma_norm_sq(u, p) == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("case", [(3, 0.1, 0.5), (4, 0.5, 1.0)])
def test_bubble_attains_best_constant(case):
    p = ProblemParams(*case)
    assert rayleigh_quotient(Bubble(p).as_radial(), p) == pytest.approx(best_constant(p), rel=1e-10)
    assert deficit(Bubble(p, 3.0, -2.0).as_radial(), p).relative_deficit == pytest.approx(0.0, abs=1e-10)


def test_hardy_sobolev_inequality_on_random_functions():
    for u in random_bumps(1):
        rep = deficit(u, P)
        assert rep.deficit >= -1e-12 * rep.gamma_norm_sq
        assert rep.relative_deficit > 1e-4


def test_norm_sandwich():
    ratio = 1 - P.gamma / P.gamma_H
    for u in random_bumps(2) + random_bumps(5, sector=1):
        g = gamma_norm_sq(u, P)
        d = gamma_norm_sq(u, P, gamma=0.0)
        assert ratio * d <= g * (1 + 1e-12)
        assert g <= d * (1 + 1e-12)


def test_cauchy_schwarz_and_symmetry():
    fs = random_bumps(3, n=6)
    for u, v in zip(fs, fs[1:]):
        ip = inner_gamma(u, v, P)
        assert ip == pytest.approx(inner_gamma(v, u, P), rel=1e-12)
        assert abs(ip) <= math.sqrt(gamma_norm_sq(u, P) * gamma_norm_sq(v, P)) * (1 + 1e-12)
        assert ip == pytest.approx(
            0.25 * (gamma_norm_sq(u + v, P) - gamma_norm_sq(u - v, P)), rel=1e-9, abs=1e-12
        )


def test_cross_sector_pairing_vanishes():
    a = log_bump(0.0, 1.0)
    b = log_bump(0.0, 1.0, sector=2)
    assert inner_gamma(a, b, P) == 0.0
    m = MultiSector([a, b])
    assert gamma_norm_sq(m, P) == pytest.approx(gamma_norm_sq(a, P) + gamma_norm_sq(b, P), rel=1e-14)


def test_zonal_harmonics_normalized():
    for N in (3, 4, 6):
        for k in (1, 2, 3):
            assert angular_lp_factor(N, k, 2.0) == pytest.approx(1.0, rel=1e-10)
    # Legendre P_1 on S^2 scaled to mean square one is sqrt(3) x
    assert zonal_harmonic(3, 1, 0.5) == pytest.approx(math.sqrt(3) * 0.5, rel=1e-12)


def test_multisector_weighted_integral_reduces_to_single():
    a = log_bump(0.2, 0.8, sector=1)
    single = weighted_integral(a, P)
    tiny = log_bump(0.0, 0.5, 1e-13, sector=0)
    both = weighted_integral(MultiSector([tiny, a]), P)
    assert both == pytest.approx(single, rel=1e-6)


def test_hs_norm_homogeneity():
    u = log_bump(0.0, 1.0)
    assert hs_norm(3.0 * u, P) == pytest.approx(3.0 * hs_norm(u, P), rel=1e-12)


@pytest.mark.parametrize("case,k", [((4, 0.5, 1.0), 0), ((3, 0.1, 0.5), 0), ((3, 0.1, 0.5), 1)])
def test_dual_norm_against_variational_oracle(case, k):
    p = ProblemParams(*case)
    c = (p.N + 2) / 2

    def g(t):
        return np.exp(-((t - 0.3) ** 2)) * (1 + 0.5 * np.sin(2 * t))

    f = RadialFunction.closed_form(lambda r: r**-c * g(np.log(r)), sector=k)
    exact = dual_norm(f, p)
    lower = oracles.gaussian_trial_dual_norm(p.N, p.gamma, k, g, np.linspace(-12, 12, 50), 1.0)
    assert lower <= exact * (1 + 1e-9)
    assert lower >= 0.99 * exact


def test_riesz_representative_solves_equation():
    p = P
    u = log_bump(0.1, 0.7)
    f = el_residual(u, p, weight=0.0)  # equals Delta u + gamma u/r^2
    sol = riesz_solve(-1.0 * f, p)
    w = sol.as_radial(p.N)
    inside = (w.t > -8) & (w.t < 8)
    assert np.max(np.abs(w.values[inside] - u(w.radii[inside]))) < 1e-6
    assert sol.norm_sq == pytest.approx(gamma_norm_sq(u, p), rel=1e-6)


def test_dual_norm_of_unit_equation_rhs_is_one():
    p = P
    mu = best_constant(p)
    U = Bubble(p, 1.0, normalization=UNIT_GAMMA_NORM)

    def rhs(r):
        return mu ** (p.p / 2) * U.eval(r) ** (p.p - 1) / r**p.s

    f = RadialFunction.closed_form(
        rhs, sector=0,
        decay=(p.beta_minus * (p.p - 1) + p.s, p.beta_plus * (p.p - 1) + p.s),
        window=(-6 / p.kappa, 6 / p.kappa),
    )
    assert dual_norm(f, p) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_gamma_vanishes_on_bubbles(lam):
    for case in [(3, 0.1, 0.5), (4, 0.5, 1.0)]:
        p = ProblemParams(*case)
        assert gamma_of(Bubble(p, lam).as_radial(), p) <= 1e-8


def test_gamma_positive_off_manifold():
    u = Bubble(P).as_radial() + log_bump(0.0, 0.5, 0.1)
    assert gamma_of(u, P) > 1e-3


def test_dual_norm_requires_uniform_dense_grid():
    r = log_grid(1e-3, 1e3, 64)
    with pytest.raises(ResolutionError):
        dual_norm(RadialFunction.from_samples(r, np.exp(-np.log(r) ** 2)), P)
    t = np.sort(np.random.default_rng(0).uniform(-5, 5, 300))
    with pytest.raises(ResolutionError):
        dual_norm(RadialFunction(t=t, values=np.exp(-t * t)), P)


def test_el_residual_needs_radial():
    with pytest.raises(DomainError):
        el_residual(log_bump(0, 1, sector=1), P)
    with pytest.raises(DomainError):
        gamma_norm_sq(np.ones(3), P)

import math

import numpy as np
import pytest

import oracles
from hslab.bubble import EULER_LAGRANGE, UNIT_GAMMA_NORM, Bubble
from hslab.errors import AccuracyError, DomainError
from hslab.functionals import gamma_norm_sq
from hslab.params import ProblemParams, best_constant
from hslab.spectral import (
    SectorEigenproblem,
    apply_linearized,
    rayleigh,
    solve_sector,
    spectrum_report,
    weight_ln_half_norm,
    weighted_inner,
)

CASES = [(3, 0.1, 0.5), (4, 0.5, 1.0), (6, 0.9 * 4, 1.5)]


@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("k", [0, 1, 2])
def test_sector_eigenvalues_match_sech2_well(case, k):
    p = ProblemParams(*case)
    scale = best_constant(p) ** (p.p / 2)
    sol = solve_sector(SectorEigenproblem(p, k), count=3, eigenfunctions=False)
    want = oracles.well_eigenvalues(p.N, p.gamma, p.s, k, 3, scale)
    assert np.allclose(sol.eigenvalues, want, rtol=1e-7)


def test_el_normalization_gives_one_and_p_minus_one():
    p = ProblemParams(4, 0.5, 1.0)
    sol = solve_sector(SectorEigenproblem(p, 0, EULER_LAGRANGE), count=2, eigenfunctions=False)
    assert sol.eigenvalues[0] == pytest.approx(1.0, rel=1e-7)
    assert sol.eigenvalues[1] == pytest.approx(p.p - 1, rel=1e-7)


@pytest.mark.parametrize("lam", [0.01, 1.0, 100.0])
def test_eigenvalues_independent_of_scale(lam):
    p = ProblemParams(3, 0.1, 0.5)
    base = solve_sector(SectorEigenproblem(p, 0), 3, eigenfunctions=False).eigenvalues
    moved = solve_sector(SectorEigenproblem(p, 0, lam=lam), 3, eigenfunctions=False).eigenvalues
    assert np.allclose(base, moved, rtol=1e-9)


def test_ground_states_increase_with_sector():
    p = ProblemParams(4, 0.5, 1.0)
    g = [solve_sector(SectorEigenproblem(p, k), 1, eigenfunctions=False).eigenvalues[0] for k in range(5)]
    assert all(a < b for a, b in zip(g, g[1:]))


def test_eigenfunctions_are_the_bubble_and_its_tangent():
    p = ProblemParams(4, 0.5, 1.0)
    sol = solve_sector(SectorEigenproblem(p, 0, EULER_LAGRANGE), count=2)
    U = Bubble(p).as_radial()
    V = Bubble(p).tangent()
    for f, ref in zip(sol.eigenfunctions, (U, V)):
        cos = abs(
            (gamma_norm_sq(f + ref, p) - gamma_norm_sq(f - ref, p))
            / (4 * math.sqrt(gamma_norm_sq(f, p) * gamma_norm_sq(ref, p)))
        )
        assert cos == pytest.approx(1.0, abs=1e-7)
        assert gamma_norm_sq(f, p) == pytest.approx(1.0, rel=1e-10)


def test_eigenfunctions_are_weighted_orthogonal():
    p = ProblemParams(3, 0.1, 0.5)
    sol = solve_sector(SectorEigenproblem(p, 0), count=3)
    f = sol.eigenfunctions
    for i in range(3):
        for j in range(i):
            nrm = math.sqrt(weighted_inner(f[i], f[i], p) * weighted_inner(f[j], f[j], p))
            assert abs(weighted_inner(f[i], f[j], p)) < 1e-6 * nrm


def test_rayleigh_quotient_bounds():
    p = ProblemParams(4, 0.5, 1.0)
    sol = solve_sector(SectorEigenproblem(p, 0), count=3)
    f = sol.eigenfunctions
    for j in range(3):
        assert rayleigh(f[j], p) == pytest.approx(sol.eigenvalues[j], rel=1e-6)
    # any radial function has Rayleigh quotient at least eta_1, and a
    # combination orthogonal to the ground state at least eta_2
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = rng.normal(size=3)
        u = c[0] * f[0] + c[1] * f[1] + c[2] * f[2]
        assert rayleigh(u, p) >= sol.eigenvalues[0] * (1 - 1e-8)
        v = c[1] * f[1] + c[2] * f[2]
        assert rayleigh(v, p) >= sol.eigenvalues[1] * (1 - 1e-6)


def test_linearized_operator_annihilates_tangent():
    p = ProblemParams(3, 0.1, 0.5)
    V = Bubble(p, 2.0).tangent()
    out = apply_linearized(p, V, coefficient=p.p - 1, lam=2.0)
    U = Bubble(p, 2.0)
    scale = np.abs(U.eval(out.radii)) / out.radii**2
    assert np.max(np.abs(out.values) / scale) < 1e-8


def test_weight_is_in_ln_half():
    for case in CASES:
        assert math.isfinite(weight_ln_half_norm(ProblemParams(*case)))


def test_report_structure():
    p = ProblemParams(3, 0.1, 0.5)
    rep = spectrum_report(p)
    mu_p = best_constant(p) ** (p.p / 2)
    assert rep.eta1 == pytest.approx(mu_p, rel=1e-7)
    assert rep.eta2 == pytest.approx((p.p - 1) * mu_p, rel=1e-7)
    assert rep.eta3 > rep.eta2
    assert 0 < rep.alpha < 1
    assert rep.kernel_dim == 1
    assert not rep.sector1_equals_eta2
    assert rep.Lambda == pytest.approx(rep.eta3 / mu_p, rel=1e-14)
    assert rep.third_eigenfunction().sector == rep.eta3_sector
    d = rep.to_dict()
    assert d["eta2"] / d["eta1"] == pytest.approx(p.p - 1, rel=1e-7)


def test_validation():
    p = ProblemParams(3, 0.1, 0.5)
    with pytest.raises(DomainError):
        SectorEigenproblem(p, -1)
    with pytest.raises(DomainError):
        solve_sector(SectorEigenproblem(p), count=7)
    with pytest.raises(DomainError):
        SectorEigenproblem(p, grid=(0, 1, 10))
    # a window far too narrow leaves the grid sequence unconverged
    with pytest.raises(AccuracyError):
        solve_sector(SectorEigenproblem(p, grid=(-0.5, 0.5, 512)), count=2, rel_tol=1e-12)

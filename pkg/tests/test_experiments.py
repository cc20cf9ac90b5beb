import json

import numpy as np
import pytest

from hslab.bubble import UNIT_GAMMA_NORM, Bubble
from hslab.errors import DomainError
from hslab.experiments import (
    ALPHA_COLUMNS,
    alpha_table,
    alpha_table_csv,
    bianchi_egnell_scan,
    cfm_scan,
    default_cfm_family,
    gaussian_bump,
    neville,
    random_orthogonal_direction,
)
from hslab.functionals import gamma_norm_sq, inner_gamma
from hslab.params import ProblemParams

P = ProblemParams(4, 0.5, 1.0)


def test_neville_reproduces_polynomials():
    xs = [0.04, 0.02, 0.01]
    val, stages = neville(xs, [3 + 2 * x - 5 * x * x for x in xs])
    assert val == pytest.approx(3.0, abs=1e-13)
    assert len(stages) == 3 and stages[-1] == val


def test_random_directions_orthogonal_to_manifold_tangent_space():
    rng = np.random.default_rng(11)
    U = Bubble(P, 1.0, 1.0, UNIT_GAMMA_NORM).as_radial()
    Z = Bubble(P).tangent()
    for _ in range(3):
        v = random_orthogonal_direction(P, rng)
        assert gamma_norm_sq(v, P) == pytest.approx(1.0, rel=1e-10)
        assert abs(inner_gamma(v, U, P)) < 1e-10
        assert abs(inner_gamma(v, Z, P)) < 1e-10 * np.sqrt(gamma_norm_sq(Z, P))


def test_bump_is_smooth_and_positive():
    b = gaussian_bump(0.0, 1.0)
    r = np.geomspace(0.1, 10, 5)
    assert np.all(b(r) > 0)


def test_random_orthogonal_scan_bounded_below():
    scan = bianchi_egnell_scan(P, "random_orthogonal", n_random=3, seed=4)
    alpha = scan.summary["alpha"]
    assert scan.summary["min_ratio"] >= alpha * 0.95
    assert len(scan.rows) == 9


def test_tangent_scan_is_flagged():
    scan = bianchi_egnell_scan(P, "manifold_tangent", d_grid=(0.02, 0.01))
    assert all("tangent" in r["flag"] for r in scan.rows)


def test_scan_json_and_csv_are_consistent():
    scan = bianchi_egnell_scan(P, "random_orthogonal", n_random=1, d_grid=(0.02, 0.01))
    data = json.loads(scan.to_json())
    assert data["perturbation_kind"] == "random_orthogonal"
    lines = scan.to_csv().splitlines()
    assert lines[0].split(",")[0] == "d" and len(lines) == 3


def test_d_grid_validation():
    with pytest.raises(DomainError):
        bianchi_egnell_scan(P, d_grid=(0.01, 0.02))
    with pytest.raises(DomainError):
        bianchi_egnell_scan(P, d_grid=(0.5,))
    with pytest.raises(DomainError):
        bianchi_egnell_scan(P, kind="bogus")


def test_cfm_eigen_directions_match_prediction():
    fam = default_cfm_family(P, n_random=0)
    scan = cfm_scan(P, fam, d_grid=(0.02, 0.01))
    for r in scan.rows:
        if r["flag"] == "ok":
            assert r["rho_over_gamma"] == pytest.approx(r["predicted"], rel=0.05)
    assert scan.summary["ratio_drift"] < 2


def test_cfm_rejects_nonradial_direction():
    from hslab.radial import RadialFunction

    with pytest.raises(DomainError):
        cfm_scan(P, [("x", RadialFunction.closed_form(np.exp, sector=1))])


def test_alpha_table_rows():
    grid = [ProblemParams(3, 0.1, 0.5), ProblemParams(4, 0.5, 1.0)]
    rows = alpha_table(grid, threads=2)
    for r in rows:
        assert r["error"] == ""
        assert r["eta2_over_eta1"] == pytest.approx(r["p_minus_1"], rel=1e-6)
        assert 0 < r["alpha"] < 1
    text = alpha_table_csv(rows)
    assert text.splitlines()[0] == ",".join(ALPHA_COLUMNS)


@pytest.mark.parametrize("case", [(3, 0.1, 0.5), (4, 0.5, 1.0)])
def test_exponent_two_is_sharp(case):
    # deficit ~ alpha dist^2, so deficit / dist^{2.2} grows like d^{-0.2}
    scan = bianchi_egnell_scan(ProblemParams(*case), d_grid=(0.04, 4e-3, 4e-4, 4e-5, 4e-6))
    d = np.array([r["d"] for r in scan.rows])
    q = np.array([r["deficit"] / r["distance"] ** 2.2 for r in scan.rows])
    assert np.all(np.diff(q) > 0)
    slope = np.polyfit(np.log(d), np.log(q), 1)[0]
    assert slope == pytest.approx(-0.2, rel=0.05)

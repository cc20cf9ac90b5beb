import math

import numpy as np
import pytest

from hslab.bubble import Bubble
from hslab.errors import AccuracyError, DomainError, FitError
from hslab.interaction import (
    interaction_integral,
    pair_integral,
    predicted_exponent,
    scan_and_fit,
)
from hslab.params import ProblemParams, bubble_energy
from hslab.radial import QuadratureSpec, integrate_radial

P = ProblemParams(3, 0.1, 0.5)


def test_matches_generic_quadrature():
    theta = P.p - 1.0
    a, b = Bubble(P, 1.0), Bubble(P, 0.2)
    direct = P.area * integrate_radial(
        lambda r: a.eval(r) ** theta * b.eval(r) / r**P.s, P.N - 1,
        decay=(P.p * P.beta_minus + P.s, P.p * P.beta_plus + P.s),
    )
    assert interaction_integral(P, theta, 1.0, 0.2) == pytest.approx(direct, rel=1e-9)


def test_coincident_bubbles_give_energy():
    for theta in (0.3, 1.0, P.p / 2):
        assert interaction_integral(P, theta, None, 1.0) == pytest.approx(bubble_energy(P), rel=1e-12)


@pytest.mark.parametrize("scale", [1e-3, 0.5, 7.0, 1e4])
def test_common_dilation_invariance(scale):
    base = pair_integral(P, 1.2, P.p - 1.2, 1.0, 0.05)
    assert pair_integral(P, 1.2, P.p - 1.2, scale, 0.05 * scale) == pytest.approx(base, rel=1e-11)


def test_exchange_symmetry():
    a = pair_integral(P, 1.2, P.p - 1.2, 1.0, 0.01)
    b = pair_integral(P, P.p - 1.2, 1.2, 0.01, 1.0)
    assert a == pytest.approx(b, rel=1e-13)


def test_holder_bound_and_monotonicity():
    E = bubble_energy(P)
    lams = np.geomspace(1e-6, 1.0, 15)
    vals = [interaction_integral(P, 1.0, None, lam) for lam in lams]
    assert all(v <= E * (1 + 1e-12) for v in vals)
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_power_law_exponent_unequal_case():
    scan = scan_and_fit(P, P.p - 1.0, 1.0)
    assert not scan.log_case
    assert scan.predicted_exponent == pytest.approx(P.epsilon * 1.0)
    assert scan.relative_exponent_error < 0.02
    assert scan.max_ratio_envelope < 1.5


def test_log_correction_detected_equal_case():
    scan = scan_and_fit(P, P.p / 2)
    assert scan.log_case
    assert scan.predicted_exponent == pytest.approx(P.epsilon * (P.N - P.s) / (P.N - 2))
    assert scan.log_correction_detected
    assert scan.residual_log <= 0.5 * scan.residual_power
    assert scan.residual_log_fixed is not None


def test_near_degenerate_flag():
    scan = scan_and_fit(P, P.p / 2 + 0.02)
    assert scan.near_degenerate and scan.notes


def test_predicted_exponent_uses_smaller_power():
    assert predicted_exponent(P, 0.5, P.p - 0.5) == pytest.approx(0.5 * P.epsilon)


def test_csv_columns():
    text = scan_and_fit(P, 1.0, None, n_points=8).to_csv(["x"])
    lines = text.splitlines()
    assert lines[0] == "# x" and lines[1] == "lambda,integral,log_lambda,log_integral"
    assert len(lines) == 10


def test_fit_needs_enough_points(monkeypatch):
    import hslab.interaction as mod

    def flaky(p, theta, eta, lam, *a):
        if lam < 1e-3:
            raise AccuracyError("too far apart", estimate=lam)
        return 1.0

    monkeypatch.setattr(mod, "interaction_integral", flaky)
    with pytest.raises(FitError):
        scan_and_fit(P, 1.0, n_points=8)


def test_validation():
    with pytest.raises(DomainError):
        interaction_integral(P, 1.0, 1.0, 0.5)  # exponents do not sum to 2*(s)
    with pytest.raises(DomainError):
        interaction_integral(P, 1.0, None, 2.0)
    with pytest.raises(DomainError):
        scan_and_fit(P, 1.0, lambda_min=1e-2, lambda_max=1e-5)
    with pytest.raises(AccuracyError):
        pair_integral(P, 1.0, P.p - 1.0, 1.0, 1e-10, q=QuadratureSpec(t_min=-5, t_max=5))

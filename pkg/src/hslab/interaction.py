"""Two-bubble interaction integrals int (U^a)^theta (U^b)^eta |x|^{-s} dx.

In t = log r both bubbles are r^{-(N-2)/2} times a sech^{nu0} profile, and
theta + eta = 2*(s) makes the powers of r cancel, so

    I = |S^{N-1}| C^{2*(s)} int psi(t + log a)^theta psi(t + log b)^eta dt,
    psi(t) = (2 cosh(kappa t))^{-nu0}.

The integrand decays like exp(-2*(s) eps |t|) outside the two centres and
is evaluated through logarithms, so scale ratios far below 1e-5 are fine.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bubble import EULER_LAGRANGE, _log2cosh, normalization_constant
from .errors import AccuracyError, DomainError, FitError
from .params import ProblemParams
from .radial import DEFAULT_PANEL, TAIL_EXP, QuadratureSpec, gl_nodes

MAX_PANELS = 200_000
NEAR_DEGENERATE = 0.1


def _check_exponents(p: ProblemParams, theta, eta):
    theta = float(theta)
    eta = p.p - theta if eta is None else float(eta)
    if theta < 0 or eta < 0:
        raise DomainError("theta and eta must be nonnegative")
    if abs(theta + eta - p.p) > 1e-12 * p.p:
        raise DomainError(f"theta + eta must equal 2*(s) = {p.p!r}, got {theta + eta!r}")
    return theta, eta


def pair_integral(p: ProblemParams, theta: float, eta: float, lam1: float, lam2: float,
                  normalization: str = EULER_LAGRANGE, q: QuadratureSpec | None = None) -> float:
    """int (U^{lam1})^theta (U^{lam2})^eta |x|^{-s} dx."""
    if not isinstance(p, ProblemParams):
        raise DomainError("pair_integral needs ProblemParams")
    theta, eta = _check_exponents(p, theta, eta)
    for lam in (lam1, lam2):
        if not (lam > 0 and math.isfinite(lam)):
            raise DomainError("scales must be positive and finite")
    c1, c2 = -math.log(lam1), -math.log(lam2)
    kap, nu0 = p.kappa, p.nu0
    margin = TAIL_EXP / (p.p * p.epsilon) + 6.0 / kap
    lo, hi = min(c1, c2) - margin, max(c1, c2) + margin
    if q is not None and (lo < q.t_min or hi > q.t_max):
        raise AccuracyError(
            f"integrand support [{lo:.1f}, {hi:.1f}] exceeds the t-window"
            f" [{q.t_min}, {q.t_max}]; widen it",
            estimate=max(q.t_min - lo, hi - q.t_max),
        )
    n_panels = int(math.ceil((hi - lo) / DEFAULT_PANEL))
    if n_panels > MAX_PANELS:
        raise AccuracyError("scale separation too large for the quadrature window",
                            estimate=hi - lo)
    t, w = gl_nodes(lo, hi, n_panels)
    log_f = -nu0 * (theta * _log2cosh(kap * (t - c1)) + eta * _log2cosh(kap * (t - c2)))
    C = normalization_constant(p, normalization)
    return p.area * C**p.p * float(np.dot(w, np.exp(log_f)))


def interaction_integral(p: ProblemParams, theta: float, eta: float, lam: float,
                         normalization: str = EULER_LAGRANGE,
                         q: QuadratureSpec | None = None) -> float:
    """I(lam) = int U^theta (U^lam)^eta |x|^{-s} dx for lam in (0, 1]."""
    if not 0 < lam <= 1:
        raise DomainError(f"lambda must lie in (0, 1], got {lam!r}")
    return pair_integral(p, theta, eta, 1.0, lam, normalization, q)


def predicted_exponent(p: ProblemParams, theta: float, eta: float) -> float:
    if abs(theta - eta) < 1e-12:
        return p.epsilon * (p.N - p.s) / (p.N - 2)
    return p.epsilon * min(theta, eta)


def _lsq(X, Y):
    A = np.vstack([X, np.ones_like(X)]).T
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = float(np.sum((A @ coef - Y) ** 2))
    return coef, res


@dataclass
class InteractionScan:
    params: ProblemParams
    theta: float
    eta: float
    lambda_grid: np.ndarray
    values: np.ndarray
    fitted_exponent: float
    predicted_exponent: float
    residual_power: float
    log_case: bool
    near_degenerate: bool
    log_correction_detected: bool | None = None
    log_fit_exponent: float | None = None
    residual_log: float | None = None
    residual_log_fixed: float | None = None
    exponent_drift_power: float | None = None
    exponent_drift_log: float | None = None
    intercept: float = 0.0
    envelope: tuple = (1.0, 1.0)
    dropped: int = 0
    notes: list = field(default_factory=list)

    @property
    def relative_exponent_error(self) -> float:
        return abs(self.fitted_exponent / self.predicted_exponent - 1.0)

    @property
    def max_ratio_envelope(self) -> float:
        return self.envelope[1] / self.envelope[0]

    def summary(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "theta": self.theta,
            "eta": self.eta,
            "exponent_fit": self.fitted_exponent,
            "predicted_exponent": self.predicted_exponent,
            "relative_exponent_error": self.relative_exponent_error,
            "log_case": self.log_case,
            "near_degenerate": self.near_degenerate,
            "log_correction_detected": self.log_correction_detected,
            "log_fit_exponent": self.log_fit_exponent,
            "residual_power": self.residual_power,
            "residual_log": self.residual_log,
            "residual_log_fixed_exponent": self.residual_log_fixed,
            "exponent_drift_power": self.exponent_drift_power,
            "exponent_drift_log": self.exponent_drift_log,
            "intercept": self.intercept,
            "envelope_min": self.envelope[0],
            "envelope_max": self.envelope[1],
            "max_ratio_envelope": self.max_ratio_envelope,
            "dropped_points": self.dropped,
            "lambda_min": float(self.lambda_grid[0]),
            "lambda_max": float(self.lambda_grid[-1]),
            "n_points": int(len(self.lambda_grid)),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self, comments=()) -> str:
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "integral", "log_lambda", "log_integral"])
        for lam, v in zip(self.lambda_grid, self.values):
            w.writerow([repr(float(lam)), repr(float(v)), repr(math.log(lam)), repr(math.log(v))])
        return buf.getvalue()


def scan_and_fit(p: ProblemParams, theta: float, eta: float | None = None,
                 lambda_min: float = 1e-5, lambda_max: float = 1e-2, n_points: int = 24,
                 normalization: str = EULER_LAGRANGE, threads: int = 1) -> InteractionScan:
    """Evaluate I on a geometric lam-grid and fit log I against log lam.

    In the equal-exponent case the model log I = a log lam + log log(1/lam) + c
    is fitted too, and the log correction counts as detected when its
    residual is at most half the pure power-law residual.  The model with a
    frozen at its predicted value is reported alongside.
    """
    if not isinstance(p, ProblemParams):
        raise DomainError("scan_and_fit needs ProblemParams")
    theta, eta = _check_exponents(p, theta, eta)
    if not 0 < lambda_min < lambda_max <= 1:
        raise DomainError("need 0 < lambda_min < lambda_max <= 1")
    if int(n_points) < 8:
        raise DomainError("n_points must be at least 8")
    lams = np.geomspace(lambda_min, lambda_max, int(n_points))

    def one(lam):
        try:
            return interaction_integral(p, theta, eta, float(lam), normalization)
        except AccuracyError:
            return math.nan

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as ex:
        vals = np.array(list(ex.map(one, lams)))
    keep = np.isfinite(vals) & (vals > 0)
    dropped = int(np.sum(~keep))
    if keep.sum() < 6:
        raise FitError(f"only {int(keep.sum())} usable points", estimate=int(keep.sum()))
    lams, vals = lams[keep], vals[keep]
    X, Y = np.log(lams), np.log(vals)

    (slope, icpt), res_pow = _lsq(X, Y)
    pe = predicted_exponent(p, theta, eta)
    log_case = abs(theta - eta) < 1e-12
    near = (not log_case) and abs(theta - eta) < NEAR_DEGENERATE
    half = len(X) // 2

    scan = InteractionScan(
        params=p, theta=theta, eta=eta, lambda_grid=lams, values=vals,
        fitted_exponent=float(slope), predicted_exponent=pe, residual_power=res_pow,
        log_case=log_case, near_degenerate=near, dropped=dropped,
    )
    drift_pow = abs(_lsq(X[:half], Y[:half])[0][0] - _lsq(X[half:], Y[half:])[0][0])
    scan.exponent_drift_power = float(drift_pow)
    if log_case:
        LL = np.log(-X)
        (a_log, c_log), res_log = _lsq(X, Y - LL)
        z = Y - pe * X - LL
        scan.residual_log_fixed = float(np.sum((z - z.mean()) ** 2))
        scan.log_fit_exponent = float(a_log)
        scan.residual_log = res_log
        scan.log_correction_detected = bool(res_log <= 0.5 * res_pow)
        scan.exponent_drift_log = float(abs(
            _lsq(X[:half], Y[:half] - LL[:half])[0][0] - _lsq(X[half:], Y[half:] - LL[half:])[0][0]
        ))
        ratio = vals / (lams**pe * np.log(1.0 / lams))
        scan.intercept = float(c_log)
    else:
        ratio = vals / lams**pe
        scan.intercept = float(icpt)
        if near:
            scan.notes.append("|theta - eta| < 0.1: power-law check skipped")
    scan.envelope = (float(ratio.min()), float(ratio.max()))
    return scan

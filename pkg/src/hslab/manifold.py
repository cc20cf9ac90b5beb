"""Distance to the bubble manifold, the foot point, and multi-bubble fitting."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bubble import EULER_LAGRANGE, Bubble, ManifoldPoint
from .errors import AccuracyError, DomainError
from .functionals import gamma_norm_sq, inner_gamma
from .params import ProblemParams, bubble_energy
from .radial import RadialFunction, quadrature_nodes

LAMBDA_RANGE = (1e-4, 1e4)
N_SEEDS = 41
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ProjectionResult:
    best: ManifoldPoint
    distance: float
    rho: RadialFunction
    orth_residuals: tuple
    converged: bool
    iterations: int
    manifold: str = "M"
    tie_break: bool = False

    @property
    def c(self) -> float:
        return self.best.c

    @property
    def lam(self) -> float:
        return self.best.lam

    def to_dict(self) -> dict:
        o = self.orth_residuals
        return {
            "c": self.c,
            "lambda": self.lam,
            "normalization": self.best.bubble.normalization,
            "distance": self.distance,
            "or1": o[0],
            "or2": o[1],
            "or3": o[2],
            "or4": o[3],
            "converged": self.converged,
            "iterations": self.iterations,
            "manifold": self.manifold,
            "tie_break_smallest_lambda": self.tie_break,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Pairing:
    """a(lam) = <u, U^lam>_gamma and its lam-derivative, in weak form.

    Since the Euler-Lagrange bubble solves the equation,
    <u, U^lam>_gamma = int u (U^lam)^{p-1} |x|^{-s} dx, and differentiating
    in lam gives <u, V^lam>_gamma; neither needs derivatives of u.
    """

    def __init__(self, u: RadialFunction, params: ProblemParams):
        self.u = u
        self.params = params
        self.calls = 0
        self._cache = {}

    def __call__(self, x: float):
        """(a, lam * da/dlam) at lam = e^x."""
        if x in self._cache:
            return self._cache[x]
        self.calls += 1
        p = self.params
        lam = math.exp(x)
        b = Bubble(p, lam)
        nodes = quadrature_nodes([self.u, b.as_radial()], p.N)
        R, _, _ = self.u.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(self.u))
        r = np.exp(nodes.t)
        up = np.exp((p.p - 1.0) * b.log_abs(r))
        base = R * up * r ** (p.N - p.s)
        th = np.tanh(p.kappa * np.log(lam * r))
        a = p.area * nodes.integrate(base)
        da = -(p.p - 1.0) * p.epsilon * p.area * nodes.integrate(base * th)
        self._cache[x] = (a, da)
        return a, da


def _golden_max(fun, lo, hi, tol=1e-9, max_iter=200):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _refine(pair: _Pairing, x_lo, x_hi):
    """Maximize |a| on [x_lo, x_hi]; polish with a root of da/dlam."""
    obj = lambda x: abs(pair(x)[0])  # noqa: E731
    x0 = _golden_max(obj, x_lo, x_hi, tol=1e-6)
    ok = False
    step = 1e-3
    for _ in range(12):
        lo, hi = max(x_lo, x0 - step), min(x_hi, x0 + step)
        d_lo = pair(lo)[1] * math.copysign(1.0, pair(lo)[0])
        d_hi = pair(hi)[1] * math.copysign(1.0, pair(hi)[0])
        if d_lo > 0 > d_hi:
            x0 = brentq(
                lambda x: pair(x)[1] * math.copysign(1.0, pair(x)[0]), lo, hi,
                xtol=1e-14, rtol=1e-15, maxiter=200,
            )
            ok = True
            break
        step *= 2.0
    return x0, ok


def _check_input(u, params):
    if not isinstance(params, ProblemParams):
        raise DomainError("project needs ProblemParams")
    if not isinstance(u, RadialFunction):
        raise DomainError("project needs a single-sector RadialFunction")
    if u.sector != 0:
        raise DomainError("projection onto the bubble manifold needs a radial (sector 0) input")


def project(u: RadialFunction, params: ProblemParams, manifold: str = "M",
            normalization: str = EULER_LAGRANGE, lam_range=LAMBDA_RANGE,
            n_seeds: int = N_SEEDS) -> ProjectionResult:
    """Closest point c U^lam to u in ||.||_gamma.

    c is eliminated (c* = <u, U^lam>_gamma / ||U||_gamma^2), leaving a
    one-dimensional search in log lam: log-spaced seeds, golden section
    around every local maximum of |<u, U^lam>_gamma|, then a root of
    <u, V^lam>_gamma.  Equal objectives are resolved toward smaller lam.
    ``manifold`` selects the wording only ("M" or "M_tilde"); both are the
    same family here.
    """
    _check_input(u, params)
    if manifold not in ("M", "M_tilde"):
        raise DomainError("manifold must be 'M' or 'M_tilde'")
    unorm2 = gamma_norm_sq(u, params)
    if not unorm2 > 0:
        raise DomainError("cannot project a function with zero gamma-norm")

    pair = _Pairing(u, params)
    xs = np.linspace(math.log(lam_range[0]), math.log(lam_range[1]), n_seeds)
    vals = np.array([abs(pair(x)[0]) for x in xs])
    peaks = [
        i for i in range(n_seeds)
        if (i == 0 or vals[i] >= vals[i - 1]) and (i == n_seeds - 1 or vals[i] >= vals[i + 1])
    ]
    cands = []
    for i in peaks:
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, n_seeds - 1)]
        x, ok = _refine(pair, lo, hi)
        interior = xs[0] + 1e-6 < x < xs[-1] - 1e-6
        cands.append((abs(pair(x)[0]), x, ok and interior))
    top = max(c[0] for c in cands)
    ties = sorted([c for c in cands if c[0] >= top * (1 - 1e-12)], key=lambda c: c[1])
    _, x_best, converged = ties[0]
    tie = len(ties) > 1

    E = bubble_energy(params)
    lam = math.exp(x_best)
    a = pair(x_best)[0]
    if a == 0.0:
        raise AccuracyError("u is gamma-orthogonal to every bubble scanned", estimate=0.0)
    c_el = a / E
    b_el = Bubble(params, lam, c_el, EULER_LAGRANGE)
    rho = u - b_el.as_radial()
    dist2 = gamma_norm_sq(rho, params)
    orth = orthogonality_residuals(rho, params, lam)
    best = ManifoldPoint(b_el.to_normalization(normalization))
    return ProjectionResult(
        best=best,
        distance=math.sqrt(max(dist2, 0.0)),
        rho=rho,
        orth_residuals=orth,
        converged=bool(converged),
        iterations=pair.calls,
        manifold=manifold,
        tie_break=tie,
    )


def orthogonality_residuals(rho: RadialFunction, params: ProblemParams, lam: float) -> tuple:
    """(<rho,U>_gamma, <rho,V>_gamma, int rho U^{p-1}/|x|^s, int rho V U^{p-2}/|x|^s)."""
    p = params
    b = Bubble(p, lam)
    U = b.as_radial()
    V = b.tangent()
    or1 = inner_gamma(rho, U, p)
    or2 = inner_gamma(rho, V, p)
    nodes = quadrature_nodes([rho, U], p.N)
    R, _, _ = rho.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(rho))
    r = np.exp(nodes.t)
    up2 = np.exp((p.p - 2.0) * b.log_abs(r))
    Uv = b.eval(r)
    Vv = V(r)
    w = r ** (p.N - p.s)
    or3 = p.area * nodes.integrate(R * up2 * Uv * w)
    or4 = p.area * nodes.integrate(R * up2 * Vv * w)
    return (float(or1), float(or2), float(or3), float(or4))


def project_tilde(u, params, **kw) -> ProjectionResult:
    return project(u, params, manifold="M_tilde", **kw)


# ---------------------------------------------------------------------------


@dataclass
class MultiBubbleFit:
    points: list
    residual_norm: float
    relative_residual: float
    sweeps: int
    stopped_early: bool = False
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bubbles": [
                {"c": pt.c, "lambda": pt.lam, "normalization": pt.bubble.normalization}
                for pt in self.points
            ],
            "residual_norm": self.residual_norm,
            "relative_residual": self.relative_residual,
            "sweeps": self.sweeps,
            "stopped_early": self.stopped_early,
        }


def _sum_bubbles(bubbles, params):
    total = None
    for b in bubbles:
        f = b.as_radial()
        total = f if total is None else total + f
    return total


def greedy_multibubble_fit(u: RadialFunction, params: ProblemParams, nu: int,
                           backfit_sweeps: int = 30, tol: float = 1e-10,
                           normalization: str = EULER_LAGRANGE) -> MultiBubbleFit:
    """Peel off ``nu`` bubbles one at a time, then refit each against the rest.

    The greedy pass projects the running residual; the backfitting sweeps
    re-project u minus all other bubbles for each bubble in turn until the
    scales stop moving.  Bubbles are returned sorted by lam.
    """
    _check_input(u, params)
    if not 1 <= int(nu) <= 4:
        raise DomainError("nu must be between 1 and 4")
    unorm = math.sqrt(gamma_norm_sq(u, params))
    if unorm == 0.0:
        raise DomainError("cannot fit a function with zero gamma-norm")

    bubbles = []
    resid = u
    stopped = False
    for _ in range(int(nu)):
        if math.sqrt(max(gamma_norm_sq(resid, params), 0.0)) <= 1e-12 * unorm:
            stopped = True
            break
        res = project(resid, params)
        b = res.best.bubble
        bubbles.append(b)
        resid = resid - b.as_radial()

    sweeps = 0
    history = []
    if len(bubbles) > 1:
        for sweeps in range(1, backfit_sweeps + 1):
            moved = 0.0
            for i in range(len(bubbles)):
                others = [b for j, b in enumerate(bubbles) if j != i]
                target = u - _sum_bubbles(others, params)
                res = project(target, params)
                nb = res.best.bubble
                moved = max(moved, abs(math.log(nb.lam / bubbles[i].lam)),
                            abs(nb.coeff - bubbles[i].coeff) / abs(bubbles[i].coeff))
                bubbles[i] = nb
            history.append(moved)
            if moved < tol:
                break
        resid = u - _sum_bubbles(bubbles, params)

    rn = math.sqrt(max(gamma_norm_sq(resid, params), 0.0))
    bubbles.sort(key=lambda b: b.lam)
    pts = [ManifoldPoint(b.to_normalization(normalization)) for b in bubbles]
    return MultiBubbleFit(pts, rn, rn / unorm, sweeps, stopped, history)


def delta_interaction(lams) -> float:
    """min over pairs of min(lam_i/lam_j, lam_j/lam_i).

    The family is called delta-interacting when this is <= delta, so small
    values mean widely separated scales.
    """
    lams = [float(x) for x in lams]
    if len(lams) < 2:
        raise DomainError("need at least two scales")
    if any(not (x > 0 and math.isfinite(x)) for x in lams):
        raise DomainError("scales must be positive and finite")
    return min(min(a / b, b / a) for a, b in itertools.combinations(lams, 2))


def is_delta_interacting(lams, delta: float) -> bool:
    return delta_interaction(lams) <= delta

"""Spectrum of the linearized operator around a bubble, sector by sector.

With R = r^{-(N-2)/2} phi(t), t = log r, the sector-k problem

    -(r^{N-1} R')' - (gamma - lambda_k) r^{N-3} R = eta r^{N-1-s} U^{p-2} R

becomes the line problem -phi'' + eps_k^2 phi = eta W(t) phi with
W = U^{p-2} r^{2-s}, a sech^2 well.  It is discretized by linear finite
elements on a uniform t-grid centred on the bubble, with the exact
exponential-decay (Robin) condition phi' = +-eps_k phi at the two ends and a
lumped mass matrix, giving a symmetric tridiagonal pencil.  Eigenvalues come
from Sturm-sequence bisection; three nested grids are combined by Richardson
extrapolation.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.linalg import solve_banded

from .bubble import EULER_LAGRANGE, UNIT_GAMMA_NORM, Bubble
from .errors import AccuracyError, DomainError
from .functionals import gamma_norm_sq, inner_gamma
from .params import ProblemParams, best_constant
from .radial import RadialFunction, quadrature_nodes

MAX_COUNT = 6
TAU_MAX = 25.0
REL_TOL = 1e-7


@numba.njit(cache=True, nogil=True)
def _sturm_count(a, e, b, sigma):
    """Number of eigenvalues of the pencil (A, B) below sigma.

    A is symmetric tridiagonal (diagonal a, off-diagonal e), B diagonal and
    positive semidefinite; counts negative pivots of A - sigma B.
    """
    n = a.shape[0]
    count = 0
    d = a[0] - sigma * b[0]
    if d < 0.0:
        count += 1
    for i in range(1, n):
        if d == 0.0:
            d = 1e-300
        d = a[i] - sigma * b[i] - e[i - 1] * e[i - 1] / d
        if d < 0.0:
            count += 1
    return count


@numba.njit(cache=True, nogil=True)
def _bisect(a, e, b, j, lo, hi, rtol):
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _sturm_count(a, e, b, mid) > j:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SectorEigenproblem:
    """Sector-k linearized eigenproblem around c=1, U^lam in a given normalization.

    ``grid`` is (t_min, t_max, n) for the coarsest of the three nested
    grids; None picks a window around the bubble centre wide enough for the
    ground state to decay by e^{-24} and a step resolving the highest
    requested eigenfunction.
    """

    params: ProblemParams
    sector: int = 0
    normalization: str = UNIT_GAMMA_NORM
    lam: float = 1.0
    grid: tuple | None = None

    def __post_init__(self):
        if not isinstance(self.params, ProblemParams):
            raise DomainError("SectorEigenproblem needs ProblemParams")
        if int(self.sector) != self.sector or self.sector < 0:
            raise DomainError("sector must be a nonnegative integer")
        if self.normalization not in (UNIT_GAMMA_NORM, EULER_LAGRANGE):
            raise DomainError(f"unknown normalization {self.normalization!r}")
        if not self.lam > 0:
            raise DomainError("lam must be positive")
        if self.grid is not None:
            t0, t1, n = self.grid
            if not t0 < t1 or int(n) < 512:
                raise DomainError("grid must be (t_min < t_max, n >= 512)")

    @property
    def bubble(self) -> Bubble:
        return Bubble(self.params, self.lam, 1.0, self.normalization)

    @property
    def eps_k(self) -> float:
        return self.params.sector_epsilon(self.sector)

    def gamma_eff(self) -> float:
        return self.params.gamma - self.params.angular_eigenvalue(self.sector)

    def weight(self, t):
        """W(t) = U^{p-2} r^{2-s} at log radii t."""
        p = self.params
        b = self.bubble
        return np.exp((p.p - 2.0) * b.log_abs(np.exp(t)) + (2.0 - p.s) * t)

    def coarse_grid(self, count: int):
        if self.grid is not None:
            t0, t1, n = self.grid
            return float(t0), float(t1), int(n)
        p = self.params
        kap = p.kappa
        nu_max = self.eps_k / kap + count + 1
        h = 0.05 / nu_max / kap
        c = -math.log(self.lam)
        # the neglected part of the well is ~ exp(-2(1+nu) tau) at tau = kappa*|t-c|
        nu_ground = self.eps_k / kap
        half = min(TAU_MAX, max(6.0, 24.0 / (1.0 + nu_ground))) / kap
        n = max(512, int(math.ceil(2 * half / h)) + 1)
        return c - half, c + half, n

    def pencil(self, t0, t1, n):
        t = np.linspace(t0, t1, n)
        h = t[1] - t[0]
        ek2 = self.eps_k**2
        a = np.full(n, 2.0 / h + h * ek2)
        a[0] = a[-1] = 1.0 / h + 0.5 * h * ek2 + self.eps_k
        e = np.full(n - 1, -1.0 / h)
        b = h * self.weight(t)
        b[0] *= 0.5
        b[-1] *= 0.5
        return t, a, e, b


def _eigs(a, e, b, count):
    out = np.empty(count)
    for j in range(count):
        hi = 1.0
        while _sturm_count(a, e, b, hi) <= j:
            hi *= 2.0
        lo = 0.0 if j == 0 else out[j - 1] * (1 - 1e-12)
        out[j] = _bisect(a, e, b, j, lo, hi, 1e-15)
    return out


def _eigvec(a, e, b, sigma):
    """Inverse iteration for the pencil eigenvector nearest sigma."""
    n = len(a)
    shift = sigma * (1.0 - 1e-10)
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = a - shift * b
    ab[2, :-1] = e
    v = np.ones(n)
    for _ in range(4):
        v = solve_banded((1, 1), ab, b * v)
        v /= math.sqrt(float(np.dot(b, v * v)))
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


@dataclass
class SectorSolution:
    problem: SectorEigenproblem
    eigenvalues: np.ndarray
    grid_values: tuple  # eigenvalues on the h, h/2, h/4 grids
    error_estimate: np.ndarray
    eigenfunctions: list = field(default_factory=list)

    @property
    def sector(self):
        return self.problem.sector


def solve_sector(prob: SectorEigenproblem, count: int = 3, eigenfunctions: bool = True,
                 rel_tol: float = REL_TOL) -> SectorSolution:
    """Lowest ``count`` eigenvalues (and gamma-normalized eigenfunctions)."""
    if not 1 <= int(count) <= MAX_COUNT:
        raise DomainError(f"count must be in 1..{MAX_COUNT}")
    count = int(count)
    t0, t1, n = prob.coarse_grid(count)
    vals, pencils = [], []
    for level in range(3):
        m = (n - 1) * 2**level + 1
        t, a, e, b = prob.pencil(t0, t1, m)
        pencils.append((t, a, e, b))
        vals.append(_eigs(a, e, b, count))
    r1 = (4 * vals[1] - vals[0]) / 3
    r2 = (4 * vals[2] - vals[1]) / 3
    err = np.abs(r2 - r1)
    if np.any(err > rel_tol * np.abs(r2)):
        raise AccuracyError(
            f"sector {prob.sector}: grid refinement changed eigenvalues by up to"
            f" {float(np.max(err / np.abs(r2))):.2e}",
            estimate=float(np.max(err / np.abs(r2))),
            details={"coarse": r1.tolist(), "fine": r2.tolist()},
        )
    sol = SectorSolution(prob, r2, tuple(vals), err)
    if eigenfunctions:
        sol.eigenfunctions = [_eigenfunction(prob, pencils, r2[j], j) for j in range(count)]
    return sol


def _eigenfunction(prob, pencils, eta, j):
    (t2, a2, e2, b2), (t4, a4, e4, b4) = pencils[1], pencils[2]
    v2 = _eigvec(a2, e2, b2, vals_guess(a2, e2, b2, j))
    v4 = _eigvec(a4, e4, b4, vals_guess(a4, e4, b4, j))[::2]
    # put both on the same normalization before combining
    v2 = v2 / math.sqrt(float(np.dot(b2, v2 * v2)))
    v4 = v4 / math.sqrt(float(np.dot(b2, v4 * v4)))
    if np.dot(v2, v4) < 0:
        v4 = -v4
    phi = (4 * v4 - v2) / 3
    p = prob.params
    R = phi * np.exp(-0.5 * (p.N - 2) * t2)
    ek = prob.eps_k
    f = RadialFunction(
        t=t2, values=R, sector=prob.sector,
        decay=(0.5 * (p.N - 2) - ek, 0.5 * (p.N - 2) + ek),
        meta={"eigenvalue": float(eta), "index": j, "sector": prob.sector},
    )
    nrm = math.sqrt(gamma_norm_sq(f, p))
    return f * (1.0 / nrm)


def vals_guess(a, e, b, j):
    hi = 1.0
    while _sturm_count(a, e, b, hi) <= j:
        hi *= 2.0
    return _bisect(a, e, b, j, 0.0, hi, 1e-14)


# ---------------------------------------------------------------------------


@dataclass
class SpectrumReport:
    params: ProblemParams
    normalization: str
    sectors: dict  # k -> ascending eigenvalues
    eta1: float
    eta2: float
    eta3: float
    eta3_distinct: float
    eta3_sector: int
    alpha: float
    Lambda: float
    kernel_dim: int
    sector1_ground: float
    eigenfunctions: dict  # (k, i) -> RadialFunction
    error_estimates: dict

    @property
    def sector1_equals_eta2(self) -> bool:
        return abs(self.sector1_ground / self.eta2 - 1.0) < 1e-6

    def third_eigenfunction(self) -> RadialFunction:
        k = self.eta3_sector
        vals = self.sectors[k]
        i = int(np.argmin(np.abs(np.asarray(vals) - self.eta3)))
        return self.eigenfunctions[(k, i)]

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "normalization": self.normalization,
            "sectors": [
                {
                    "k": k,
                    "multiplicity": self.params.harmonic_multiplicity(k),
                    "eigenvalues": [float(x) for x in v],
                }
                for k, v in sorted(self.sectors.items())
            ],
            "eta1": self.eta1,
            "eta2": self.eta2,
            "eta3": self.eta3,
            "eta3_distinct": self.eta3_distinct,
            "eta3_sector": self.eta3_sector,
            "alpha": self.alpha,
            "Lambda": self.Lambda,
            "kernel_dim": self.kernel_dim,
            "sector1_ground": self.sector1_ground,
            "sector1_equals_eta2": self.sector1_equals_eta2,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def spectrum_report(p: ProblemParams, normalization: str = UNIT_GAMMA_NORM, lam: float = 1.0,
                    count: int = 4, eigenfunctions: bool = True, threads: int = 1,
                    grid: tuple | None = None, rel_tol: float = REL_TOL) -> SpectrumReport:
    """Merged spectrum over sectors 0..K, eta_1..eta_3, alpha and Lambda.

    Sectors are added until the ground eigenvalue of the next sector lies
    above the current third eigenvalue; the sector ground states increase
    with k, so nothing below eta_3 is missed.
    """
    if not isinstance(p, ProblemParams):
        raise DomainError("spectrum_report needs ProblemParams")

    def run(k):
        prob = SectorEigenproblem(p, k, normalization, lam, grid)
        return solve_sector(prob, count, eigenfunctions=eigenfunctions, rel_tol=rel_tol)

    sols = {}
    batch = [0, 1, 2]
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as ex:
        while True:
            for k, s in zip(batch, ex.map(run, batch)):
                sols[k] = s
            merged = _merged(p, sols)
            eta3 = merged[2][0]
            k_last = max(sols)
            if sols[k_last].eigenvalues[0] > eta3:
                break
            batch = [k_last + 1, k_last + 2]

    eta1, eta2 = merged[0][0], merged[1][0]
    distinct = sorted({round(v, 12): (v, k) for v, k in merged}.values())
    eta3_distinct = distinct[2][0]
    eta3, eta3_sector = merged[2]
    alpha = 1.0 - eta2 / eta3
    scale = best_constant(p) ** (p.p / 2.0) if normalization == UNIT_GAMMA_NORM else 1.0
    kernel = 0
    for k, s in sols.items():
        kernel += p.harmonic_multiplicity(k) * int(
            np.sum(np.abs(s.eigenvalues / eta2 - 1.0) < 1e-6)
        )
    efs = {}
    for k, s in sols.items():
        for i, f in enumerate(s.eigenfunctions):
            efs[(k, i)] = f
    return SpectrumReport(
        params=p,
        normalization=normalization,
        sectors={k: s.eigenvalues.copy() for k, s in sols.items()},
        eta1=float(eta1),
        eta2=float(eta2),
        eta3=float(eta3),
        eta3_distinct=float(eta3_distinct),
        eta3_sector=int(eta3_sector),
        alpha=float(alpha),
        Lambda=float(eta3 / scale),
        kernel_dim=kernel,
        sector1_ground=float(sols[1].eigenvalues[0]),
        eigenfunctions=efs,
        error_estimates={k: s.error_estimate.copy() for k, s in sols.items()},
    )


def _merged(p, sols):
    """Ascending (eigenvalue, sector) list, each repeated by harmonic multiplicity."""
    out = []
    for k, s in sols.items():
        m = p.harmonic_multiplicity(k)
        out.extend([(float(v), k)] * m for v in s.eigenvalues)
    flat = [x for grp in out for x in grp]
    return sorted(flat)


# ---------------------------------------------------------------------------


def apply_linearized(p: ProblemParams, rho: RadialFunction, coefficient: float = 1.0,
                     normalization: str = EULER_LAGRANGE, lam: float = 1.0,
                     h: float = 0.01) -> RadialFunction:
    """-Delta rho - gamma rho/|x|^2 - coefficient * U^{p-2} rho/|x|^s, sampled.

    ``coefficient`` is 1 for the eigenvalue form and 2*(s)-1 for the
    linearized Euler-Lagrange operator.
    """
    if not isinstance(rho, RadialFunction):
        raise DomainError("apply_linearized needs a single-sector RadialFunction")
    from .radial import uniform_grid_for

    N = p.N
    if rho.kind == "sampled":
        t = rho.t
        R, dR, d2R = rho.values, rho.dvalues, rho.d2values
    else:
        t = uniform_grid_for([rho], N, h=h)
        R, dR, d2R = rho.at_nodes(t, need_d2=True)
    r = np.exp(t)
    b = Bubble(p, lam, 1.0, normalization)
    w = np.exp((p.p - 2) * b.log_abs(r)) / r**p.s
    lam_k = p.angular_eigenvalue(rho.sector)
    out = -d2R - (N - 1) * dR / r + (lam_k - p.gamma) * R / r**2 - coefficient * w * R
    return RadialFunction(t=t, values=out, sector=rho.sector, decay=None)


def weighted_inner(u: RadialFunction, v: RadialFunction, p: ProblemParams,
                   normalization: str = UNIT_GAMMA_NORM, lam: float = 1.0) -> float:
    """int U^{p-2} u v / |x|^s dx (the weight of the eigenvalue problem)."""
    if u.sector != v.sector:
        return 0.0
    nodes = quadrature_nodes([u, v], p.N)
    Ru, _, _ = u.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(u))
    Rv, _, _ = v.at_nodes(nodes.t, same_grid=nodes.on_owner_grid(v))
    r = np.exp(nodes.t)
    b = Bubble(p, lam, 1.0, normalization)
    w = np.exp((p.p - 2) * b.log_abs(r))
    return p.area * nodes.integrate(w * Ru * Rv * r ** (p.N - p.s))


def rayleigh(u: RadialFunction, p: ProblemParams, normalization: str = UNIT_GAMMA_NORM,
             lam: float = 1.0) -> float:
    """||u||_gamma^2 / int U^{p-2} u^2/|x|^s."""
    return gamma_norm_sq(u, p) / weighted_inner(u, u, p, normalization, lam)


def weight_ln_half_norm(p: ProblemParams, normalization: str = EULER_LAGRANGE) -> float:
    """int (U^{p-2}/|x|^s)^{N/2} dx, finite for every admissible (N, gamma, s)."""
    b = Bubble(p, 1.0, 1.0, normalization)
    f = b.as_radial()
    nodes = quadrature_nodes([f], p.N)
    r = np.exp(nodes.t)
    lw = (p.p - 2) * b.log_abs(r) - p.s * np.log(r)
    return p.area * nodes.integrate(np.exp(0.5 * p.N * lw) * r**p.N)


__all__ = [
    "SectorEigenproblem",
    "SectorSolution",
    "SpectrumReport",
    "apply_linearized",
    "inner_gamma",
    "rayleigh",
    "solve_sector",
    "spectrum_report",
    "weight_ln_half_norm",
    "weighted_inner",
]

"""Perturbative checks of the stability inequalities around a single bubble."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bubble import EULER_LAGRANGE, UNIT_GAMMA_NORM, Bubble
from .errors import AccuracyError, DomainError
from .functionals import deficit, el_residual, dual_norm, gamma_norm_sq, inner_gamma
from .manifold import project
from .params import ProblemParams, bubble_energy
from .radial import MultiSector, RadialFunction
from .spectral import SectorEigenproblem, solve_sector, spectrum_report

KINDS = ("third_eigenfunction", "random_orthogonal", "manifold_tangent")
DEFAULT_D_GRID = (0.04, 0.02, 0.01)


@dataclass
class StabilityScan:
    params: ProblemParams
    perturbation_kind: str
    d_grid: tuple
    rows: list
    limit_estimate: float | None = None
    stages: list = field(default_factory=list)
    expected: float | None = None
    summary: dict = field(default_factory=dict)

    COLUMNS = (
        "d", "member", "deficit", "distance", "ratio", "gamma_u", "rho_norm",
        "rho_over_gamma", "norm_sq", "energy_window_norm", "energy_window_norm_sq",
        "flag",
    )

    def to_csv(self, comments=()) -> str:
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows:
            w.writerow([_cell(row.get(k)) for k in self.COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "perturbation_kind": self.perturbation_kind,
            "d_grid": list(self.d_grid),
            "limit_estimate": self.limit_estimate,
            "richardson_stages": self.stages,
            "expected": self.expected,
            "rows": self.rows,
            **self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(type(x).__name__)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _check_d_grid(d_grid, upper=0.05):
    d = tuple(float(x) for x in d_grid)
    if not d:
        raise DomainError("d_grid is empty")
    if any(not 0 < x <= upper for x in d):
        raise DomainError(f"amplitudes must lie in (0, {upper}]")
    if any(b >= a for a, b in zip(d, d[1:])):
        raise DomainError("d_grid must be strictly decreasing")
    return d


def neville(xs, ys, x0=0.0):
    """Value at x0 of the interpolating polynomial, with all tableau diagonals."""
    xs = list(xs)
    P = list(ys)
    stages = [P[-1]]
    n = len(xs)
    for m in range(1, n):
        P = [
            ((x0 - xs[i + m]) * P[i] - (x0 - xs[i]) * P[i + 1]) / (xs[i] - xs[i + m])
            for i in range(n - m)
        ]
        stages.append(P[-1])
    return P[0], stages


# ---------------------------------------------------------------------------
# perturbation directions


def gaussian_bump(center: float, width: float, amp: float = 1.0) -> RadialFunction:
    """amp * exp(-(log r - center)^2 / (2 width^2)), closed form."""

    def f(r):
        z = (np.log(r) - center) / width
        return amp * np.exp(-0.5 * z * z)

    def df(r):
        z = (np.log(r) - center) / width
        return f(r) * (-z / width) / r

    def d2f(r):
        z = (np.log(r) - center) / width
        return f(r) * (z * z / width**2 - 1.0 / width**2 + z / width) / r**2

    return RadialFunction.closed_form(
        f, df, d2f, sector=0, decay=(-1e3, 1e3),
        window=(center - 8 * width, center + 8 * width),
    )


def random_orthogonal_direction(p: ProblemParams, rng: np.random.Generator, n_bumps: int = 4,
                                lam: float = 1.0) -> RadialFunction:
    """Smooth bumps, gamma-orthogonalized against U^lam and its tangent, unit gamma-norm."""
    f = None
    for _ in range(n_bumps):
        g = gaussian_bump(
            center=-math.log(lam) + rng.uniform(-2.0, 2.0) / p.kappa,
            width=rng.uniform(0.5, 1.5) / p.kappa,
            amp=rng.normal(),
        )
        f = g if f is None else f + g
    b = Bubble(p, lam)
    return _orthonormalize(f, [b.as_radial(), b.tangent()], p)


def _orthonormalize(f, basis, p):
    ortho = []
    for e in basis:
        for q in ortho:
            e = e - q * inner_gamma(e, q, p)
        ortho.append(e / math.sqrt(gamma_norm_sq(e, p)))
    for _ in range(2):
        for q in ortho:
            f = f - q * inner_gamma(f, q, p)
    return f / math.sqrt(gamma_norm_sq(f, p))


def _combine(U: RadialFunction, v: RadialFunction, d: float):
    if v.sector == 0:
        return U + v * d
    return MultiSector([U, v * d])


def _distance(u, p):
    """dist(u, M); non-radial components are orthogonal to the radial manifold."""
    if isinstance(u, MultiSector):
        rad = u.component(0)
        rest = sum(gamma_norm_sq(c, p) for c in u.components if c.sector != 0)
        res = project(rad, p)
        return math.sqrt(res.distance**2 + rest), res
    res = project(u, p)
    return res.distance, res


# ---------------------------------------------------------------------------


def bianchi_egnell_scan(p: ProblemParams, kind: str = "third_eigenfunction",
                        d_grid=DEFAULT_D_GRID, seed: int = 0, n_random: int = 20,
                        report=None, threads: int = 1) -> StabilityScan:
    """deficit(U + d v) / dist(U + d v, M)^2 along a fixed direction v.

    U is the unit-norm bubble and v has unit gamma-norm.  For the third
    eigenfunction the ratio tends to 1 - eta_2/eta_3; the limit is taken by
    polynomial extrapolation in d through the grid values.  When eta_3
    belongs to a non-radial sector the perturbation is a two-sector sum and
    the deficit is integrated over the sphere.
    """
    if not isinstance(p, ProblemParams):
        raise DomainError("bianchi_egnell_scan needs ProblemParams")
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}")
    d_grid = _check_d_grid(d_grid)
    U = Bubble(p, 1.0, 1.0, UNIT_GAMMA_NORM).as_radial()
    rep = report or spectrum_report(p, UNIT_GAMMA_NORM, threads=threads)
    alpha = rep.alpha

    if kind == "third_eigenfunction":
        members = [("v3", rep.third_eigenfunction())]
    elif kind == "manifold_tangent":
        Z = Bubble(p, 1.0).tangent()
        members = [("Z", Z / math.sqrt(gamma_norm_sq(Z, p)))]
    else:
        rng = np.random.default_rng(seed)
        members = [(f"seed{seed}:{i}", random_orthogonal_direction(p, rng))
                   for i in range(n_random)]

    def row(task):
        name, v, d = task
        u = _combine(U, v, d)
        rec = {"d": d, "member": name}
        try:
            dr = deficit(u, p)
            dist, _ = _distance(u, p)
            rec.update(deficit=dr.deficit, distance=dist, norm_sq=dr.gamma_norm_sq)
            if kind == "manifold_tangent" or dist < 1e-3 * d:
                rec["ratio"] = dr.deficit / dist**2 if dist > 0 else None
                rec["flag"] = "tangent direction: distance is o(d)"
            else:
                rec["ratio"] = dr.deficit / dist**2
                rec["flag"] = "ok"
        except (AccuracyError, DomainError) as exc:
            rec["flag"] = f"failed: {exc}"
        return rec

    tasks = [(name, v, d) for name, v in members for d in d_grid]
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as ex:
        rows = list(ex.map(row, tasks))
    rows.sort(key=lambda r: (-r["d"], r["member"]))

    scan = StabilityScan(p, kind, d_grid, rows, expected=alpha)
    scan.summary = {
        "alpha": alpha,
        "eta2": rep.eta2,
        "eta3": rep.eta3,
        "eta3_sector": rep.eta3_sector,
        "normalization": UNIT_GAMMA_NORM,
    }
    if kind == "third_eigenfunction":
        ds = [r["d"] for r in rows if r.get("ratio") is not None]
        ys = [r["ratio"] for r in rows if r.get("ratio") is not None]
        if len(ys) >= 2:
            lim, stages = neville(ds, ys)
            scan.limit_estimate = float(lim)
            scan.stages = [float(x) for x in stages]
            scan.summary["relative_error"] = abs(lim / alpha - 1.0)
    elif kind == "random_orthogonal":
        ratios = [r["ratio"] for r in rows if r.get("ratio") is not None]
        scan.summary["min_ratio"] = min(ratios) if ratios else None
    return scan


# ---------------------------------------------------------------------------


def default_cfm_family(p: ProblemParams, n_random: int = 3, seed: int = 0):
    """Radial directions gamma-orthogonal to U and Z with unit gamma-norm."""
    sol = solve_sector(SectorEigenproblem(p, 0, EULER_LAGRANGE), 4)
    fam = [(f"v{i + 1}", sol.eigenfunctions[i], float(sol.eigenvalues[i])) for i in (2, 3)]
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        fam.append((f"seed{seed}:{i}", random_orthogonal_direction(p, rng), None))
    return fam


def _nonneg_amplitude(U: RadialFunction, rho: RadialFunction, d: float, p: ProblemParams):
    """Largest d' <= d (halving) with U + d' rho >= 0 on a wide log grid."""
    t = np.linspace(U.window[0] - 60.0, U.window[1] + 60.0, 4001)
    r = np.exp(t)
    uv = U(r)
    rv = rho(r)
    shrunk = False
    while np.any(uv + d * rv < 0):
        d *= 0.5
        shrunk = True
        if d < 1e-12:
            break
    return d, shrunk


def cfm_scan(p: ProblemParams, rho_family=None, d_grid=None, seed: int = 0,
             threads: int = 1) -> StabilityScan:
    """||rho||_gamma / Gamma(u) for u = U + d rho around the Euler-Lagrange bubble.

    rho is the projection residual of u onto the manifold and Gamma(u) the
    dual norm of its Euler-Lagrange residual.  The ratio should stay bounded
    as d -> 0; for an eigen-direction with eigenvalue eta it tends to
    1/(1 - (2*(s)-1)/eta).
    """
    if not isinstance(p, ProblemParams):
        raise DomainError("cfm_scan needs ProblemParams")
    d_grid = _check_d_grid(d_grid or tuple(np.geomspace(0.04, 0.005, 7)))
    fam = rho_family if rho_family is not None else default_cfm_family(p, seed=seed)
    fam = [m if len(m) == 3 else (m[0], m[1], None) for m in fam]
    for name, f, _ in fam:
        if f.sector != 0:
            raise DomainError(f"perturbation {name} is not radial")
    b = Bubble(p, 1.0, 1.0, EULER_LAGRANGE)
    U = b.as_radial()
    E = bubble_energy(p)

    def row(task):
        name, rho, eta, d = task
        rec = {"d": d, "member": name}
        d_eff, shrunk = _nonneg_amplitude(U, rho, d, p)
        if shrunk:
            rec["flag"] = f"skipped: u not nonnegative at this d (would need d <= {d_eff:.3g})"
            return rec
        u = U + rho * d
        try:
            g = dual_norm(el_residual(u, p), p)
            res = project(u, p)
            nsq = gamma_norm_sq(u, p)
            rec.update(
                gamma_u=g,
                rho_norm=res.distance,
                rho_over_gamma=res.distance / g if g > 0 else None,
                norm_sq=nsq,
                energy_window_norm=bool(0.5 * E <= math.sqrt(nsq) <= 1.5 * E),
                energy_window_norm_sq=bool(0.5 * E <= nsq <= 1.5 * E),
                flag="ok",
            )
            if eta is not None:
                rec["predicted"] = 1.0 / (1.0 - (p.p - 1.0) / eta)
        except (AccuracyError, DomainError) as exc:
            rec["flag"] = f"failed: {exc}"
        return rec

    tasks = [(n, f, e, d) for n, f, e in fam for d in d_grid]
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as ex:
        rows = list(ex.map(row, tasks))
    rows.sort(key=lambda r: (-r["d"], r["member"]))

    per_d = {}
    for r in rows:
        if r.get("rho_over_gamma") is not None:
            per_d[r["d"]] = max(per_d.get(r["d"], 0.0), r["rho_over_gamma"])
    scan = StabilityScan(p, "cfm_family", d_grid, rows)
    maxima = [per_d[d] for d in d_grid if d in per_d]
    scan.summary = {
        "normalization": EULER_LAGRANGE,
        "bubble_energy": E,
        "max_ratio_per_d": [[d, per_d[d]] for d in d_grid if d in per_d],
        "ratio_drift": (max(maxima) / min(maxima)) if maxima else None,
        "skipped_rows": sum(1 for r in rows if str(r.get("flag", "")).startswith("skipped")),
    }
    return scan


# ---------------------------------------------------------------------------


def alpha_table(param_grid, threads: int = 1):
    """One spectrum report per grid point; failures are recorded and skipped."""

    def one(p):
        row = {"N": p.N, "gamma": p.gamma, "s": p.s}
        try:
            rep = spectrum_report(p, UNIT_GAMMA_NORM, eigenfunctions=False)
            row.update(
                eta1=rep.eta1, eta2=rep.eta2, eta3=rep.eta3, alpha=rep.alpha,
                eta2_over_eta1=rep.eta2 / rep.eta1, p_minus_1=p.p - 1.0,
                eta3_sector=rep.eta3_sector, kernel_dim=rep.kernel_dim,
                Lambda=rep.Lambda, error="",
            )
        except (AccuracyError, DomainError) as exc:
            row["error"] = str(exc)
        return row

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as ex:
        return list(ex.map(one, list(param_grid)))


ALPHA_COLUMNS = ("N", "gamma", "s", "eta1", "eta2", "eta3", "alpha", "eta2_over_eta1",
                 "p_minus_1", "eta3_sector", "kernel_dim", "Lambda", "error")


def alpha_table_csv(rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ALPHA_COLUMNS)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in ALPHA_COLUMNS])
    return buf.getvalue()

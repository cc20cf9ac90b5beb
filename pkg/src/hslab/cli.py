"""Command-line front end: ``hslab <command> --N .. --gamma .. --s ..``.

Results go to stdout as JSON unless ``--out`` names a .json file, a .csv
file, or a directory (then both ``<command>_<N>_<gamma>_<s>.csv`` and the
matching .json are written).  Every file carries the full run configuration.
Exit status: 0 success, 2 invalid input, 3 numerical accuracy failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bubble import EULER_LAGRANGE, NORMALIZATIONS, Bubble
from .errors import AccuracyError, DomainError
from .experiments import (
    KINDS,
    alpha_table,
    alpha_table_csv,
    bianchi_egnell_scan,
    cfm_scan,
)
from .functionals import deficit
from .interaction import scan_and_fit
from .manifold import greedy_multibubble_fit, project
from .params import (
    ProblemParams,
    best_constant,
    bubble_energy,
    el_normalization_constant,
    params_asdict,
    unit_norm_constant,
)
from .radial import read_csv
from .spectral import spectrum_report

MATH_COMMANDS = (
    "constant", "deficit", "distance", "spectrum", "interaction-scan",
    "stability-scan", "cfm-scan", "fit-bubbles",
)


@dataclass
class RunConfig:
    command: str
    params: dict
    options: dict = field(default_factory=dict)
    seed: int = 0
    reference_mode: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def header(self) -> str:
        return "run_config=" + json.dumps(self.to_dict(), sort_keys=True, default=_plain)


def _plain(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _add_common(sp, need_params=True):
    if need_params:
        sp.add_argument("--N", type=int, required=True, help="dimension (>= 3)")
        sp.add_argument("--gamma", type=float, required=True, help="Hardy coefficient")
        sp.add_argument("--s", type=float, required=True, help="singular exponent")
    sp.add_argument("--reference-mode", action="store_true",
                    help="allow the boundary cases gamma = 0 and s = 0")
    sp.add_argument("--out", help="output .json, .csv, or directory")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=_positive_int, default=None,
                    help="worker cap (fallback: HSLAB_THREADS, then 1)")
    sp.add_argument("--tol", type=_positive_float, default=None,
                    help="relative tolerance for grid refinement checks")
    sp.add_argument("--grid-n", type=int, default=None,
                    help="points of the coarsest spectral grid (>= 512)")
    sp.add_argument("--t-window", type=float, nargs=2, default=None,
                    metavar=("T_MIN", "T_MAX"), help="log-radius window")


def _add_input(sp):
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", help="radial CSV file (header r,value)")
    g.add_argument("--bubble", action="store_true", help="use c * U^lambda as input")
    sp.add_argument("--lambda", dest="lam", type=_positive_float, default=1.0)
    sp.add_argument("--coeff", type=float, default=1.0)
    sp.add_argument("--normalization", choices=NORMALIZATIONS, default=EULER_LAGRANGE)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hslab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"hslab {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="command")

    sp = sub.add_parser("constant", help="best constant and bubble normalizations")
    _add_common(sp)

    sp = sub.add_parser("deficit", help="deficit of a file or synthetic input")
    _add_common(sp)
    _add_input(sp)

    sp = sub.add_parser("distance", help="projection onto the bubble manifold")
    _add_common(sp)
    _add_input(sp)
    sp.add_argument("--manifold", choices=("M", "M_tilde"), default="M")

    sp = sub.add_parser("spectrum", help="linearized-operator spectrum")
    _add_common(sp)
    sp.add_argument("--count", type=int, default=4)
    sp.add_argument("--normalization", choices=NORMALIZATIONS, default="unit_gamma_norm")

    sp = sub.add_parser("alpha-table", help="alpha over a parameter grid")
    _add_common(sp, need_params=False)
    sp.add_argument("--N", type=int, nargs="+", default=[3, 4, 6])
    sp.add_argument("--gamma-frac", type=float, nargs="+", default=[0.1, 0.5, 0.9],
                    help="gamma as fractions of (N-2)^2/4")
    sp.add_argument("--s", type=float, nargs="+", default=[0.5, 1.0, 1.5])

    sp = sub.add_parser("interaction-scan", help="two-bubble interaction asymptotics")
    _add_common(sp)
    sp.add_argument("--theta", type=float, default=None, help="default 2*(s)-1")
    sp.add_argument("--eta", type=float, default=None, help="default 2*(s)-theta")
    sp.add_argument("--lambda-min", type=_positive_float, default=1e-5)
    sp.add_argument("--lambda-max", type=_positive_float, default=1e-2)
    sp.add_argument("--n-points", type=int, default=24)

    sp = sub.add_parser("stability-scan", help="deficit / distance^2 scan")
    _add_common(sp)
    sp.add_argument("--kind", choices=KINDS, default="third_eigenfunction")
    sp.add_argument("--d-grid", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    sp.add_argument("--n-random", type=int, default=20)

    sp = sub.add_parser("cfm-scan", help="||rho|| / Gamma(u) scan")
    _add_common(sp)
    sp.add_argument("--d-grid", type=float, nargs="+", default=None)

    sp = sub.add_parser("fit-bubbles", help="greedy multi-bubble fit")
    _add_common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", help="radial CSV file")
    g.add_argument("--lambdas", type=_positive_float, nargs="+",
                   help="synthetic input: sum of Euler-Lagrange bubbles at these scales")
    sp.add_argument("--nu", type=int, default=2)
    return ap


def _threads(args) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get("HSLAB_THREADS", "").strip()
    if env:
        try:
            v = int(env)
        except ValueError:
            raise DomainError(f"HSLAB_THREADS must be a positive integer, got {env!r}")
        if v < 1:
            raise DomainError("HSLAB_THREADS must be a positive integer")
        return v
    return 1


def _params(args) -> ProblemParams:
    return ProblemParams(args.N, args.gamma, args.s, reference=args.reference_mode)


def _input_function(args, p):
    if args.input:
        return read_csv(args.input)
    return Bubble(p, args.lam, args.coeff, args.normalization).as_radial()


def _kv_csv(d: dict, comments) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k in sorted(d):
        v = d[k]
        if isinstance(v, (dict, list)):
            v = json.dumps(v, sort_keys=True, default=_plain)
        elif isinstance(v, float):
            v = repr(v)
        w.writerow([k, v])
    return buf.getvalue()


def _spectrum_csv(rep, comments) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "index", "multiplicity", "eigenvalue"])
    for k, vals in sorted(rep.sectors.items()):
        for i, v in enumerate(vals):
            w.writerow([k, i, rep.params.harmonic_multiplicity(k), repr(float(v))])
    return buf.getvalue()


def run(args) -> tuple[dict, callable | None]:
    """Execute one command; returns (JSON payload, CSV writer or None)."""
    cmd = args.command
    threads = _threads(args)

    if cmd == "alpha-table":
        grid = []
        for N in args.N:
            for f in args.gamma_frac:
                for s in args.s:
                    grid.append(ProblemParams(N, f * (N - 2) ** 2 / 4.0, s,
                                              reference=args.reference_mode))
        rows = alpha_table(grid, threads=threads)
        return {"rows": rows}, lambda c: alpha_table_csv(rows, c)

    p = _params(args)
    if cmd == "constant":
        out = params_asdict(p)
        out.update(C_unit=unit_norm_constant(p), bubble_energy=bubble_energy(p),
                   mu=best_constant(p), C_el=el_normalization_constant(p))
        return out, lambda c: _kv_csv(out, c)

    if cmd == "deficit":
        rep = deficit(_input_function(args, p), p)
        out = rep.to_dict()
        return out, lambda c: _kv_csv(out, c)

    if cmd == "distance":
        res = project(_input_function(args, p), p, manifold=args.manifold)
        out = res.to_dict()
        return out, lambda c: _kv_csv(out, c)

    if cmd == "spectrum":
        grid = None
        if args.grid_n is not None or args.t_window is not None:
            if args.grid_n is None or args.t_window is None:
                raise DomainError("--grid-n and --t-window must be given together")
            grid = (args.t_window[0], args.t_window[1], args.grid_n)
        kw = {"rel_tol": args.tol} if args.tol else {}
        rep = spectrum_report(p, args.normalization, count=args.count,
                              eigenfunctions=False, threads=threads, grid=grid, **kw)
        out = rep.to_dict()
        out["eta2_over_eta1"] = rep.eta2 / rep.eta1
        return out, lambda c: _spectrum_csv(rep, c)

    if cmd == "interaction-scan":
        theta = args.theta if args.theta is not None else p.p - 1.0
        scan = scan_and_fit(p, theta, args.eta, args.lambda_min, args.lambda_max,
                            args.n_points, threads=threads)
        return scan.summary(), scan.to_csv

    if cmd == "stability-scan":
        scan = bianchi_egnell_scan(p, args.kind, args.d_grid, seed=args.seed,
                                   n_random=args.n_random, threads=threads)
        return scan.to_dict(), scan.to_csv

    if cmd == "cfm-scan":
        scan = cfm_scan(p, d_grid=args.d_grid, seed=args.seed, threads=threads)
        return scan.to_dict(), scan.to_csv

    if cmd == "fit-bubbles":
        if args.input:
            u = read_csv(args.input)
        else:
            u = None
            for lam in args.lambdas:
                f = Bubble(p, lam).as_radial()
                u = f if u is None else u + f
        fit = greedy_multibubble_fit(u, p, args.nu)
        out = fit.to_dict()

        def fit_csv(c):
            buf = io.StringIO()
            for line in c:
                buf.write(f"# {line}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["index", "c", "lambda"])
            for i, b in enumerate(out["bubbles"]):
                w.writerow([i, repr(b["c"]), repr(b["lambda"])])
            return buf.getvalue()

        return out, fit_csv

    raise DomainError(f"unknown command {cmd!r}")


def _config(args) -> RunConfig:
    skip = {"command", "N", "gamma", "s", "out", "seed", "reference_mode", "threads"}
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if args.command == "alpha-table":
        params = {"N": args.N, "gamma_frac": args.gamma_frac, "s": args.s}
    else:
        params = {"N": args.N, "gamma": args.gamma, "s": args.s}
    return RunConfig(args.command, params, opts, args.seed, args.reference_mode)


def _file_stem(cfg: RunConfig) -> str:
    p = cfg.params
    if cfg.command == "alpha-table":
        return "alpha-table_grid"
    return f"{cfg.command}_{p['N']}_{p['gamma']!r}_{p['s']!r}"


def emit(payload: dict, csv_writer, cfg: RunConfig, out: str | None, stdout=None):
    stdout = stdout or sys.stdout
    doc = dict(payload)
    doc["run_config"] = cfg.to_dict()
    text = json.dumps(doc, indent=2, sort_keys=True, default=_plain) + "\n"
    comments = [cfg.header()]
    if out is None:
        stdout.write(text)
        return []
    written = []
    parent = os.path.dirname(out)
    if parent and out.endswith((".json", ".csv")):
        os.makedirs(parent, exist_ok=True)
    if out.endswith(".json"):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(out)
    elif out.endswith(".csv"):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_writer(comments))
        written.append(out)
    else:
        os.makedirs(out, exist_ok=True)
        stem = os.path.join(out, _file_stem(cfg))
        with open(stem + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_writer(comments))
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            fh.write(text)
        written += [stem + ".csv", stem + ".json"]
    return written


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.command != "spectrum" and (args.grid_n is not None) and args.grid_n < 512:
            raise DomainError("--grid-n must be at least 512")
        cfg = _config(args)
        payload, writer = run(args)
        emit(payload, writer, cfg, args.out)
    except DomainError as exc:
        print(f"hslab: invalid input: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"hslab: accuracy failure: {exc} (estimate={exc.estimate})", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"hslab: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

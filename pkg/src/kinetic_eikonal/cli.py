"""Command-line harness: one subcommand per experiment, CSV artifacts out.

Subcommands and the files they write into --out (created if needed):

  hamiltonian  h_table.csv       header p,H,dH,d2H; rows p ascending
  legendre     legendre.csv      header q,L; rows q ascending
  hj           hj_series.csv     header t,x,phi; t-major, x ascending
  kinetic      kinetic_final.csv header x,v,phi; x-major, v ascending
               macro_series.csv  header t,x,phi_macro; t-major, x ascending
               bounds.csv        header t,min_phi,max_phi,lip_x,rate_t,lip_v,violations
                                 (one row per snapshot; violations = count;
                                 rate_t is nan on the first row, lip_v is nan
                                 for atomic velocity models)
  converge     converge.csv      header eps,sup_error; rows follow --eps order
  compare      hj_kinetic.csv, hj_classical.csv
                                 both header t,x,phi; same layout as hj
  bounds       bounds.csv        as under kinetic, without the other files

Model specs: uniform:vmax=1,n=64 | atoms:(1,0.5);(-1,0.5) | coth:vmax=1 |
relativistic | classical:theta2=0.25.  The phase-space experiments (kinetic,
converge, bounds) need a velocity node model (uniform/atoms).

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.  Floats are
written with full round-trip precision; identical invocations give
byte-identical files.  Partially written outputs are removed on failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .hamiltonian import Hamiltonian, NumericalError, hamiltonian_from_spec
from .hj import HJRunConfig, initial_profile, parse_initial_spec, solve_hj
from .kinetic import check_bounds, converge_study, macro_phase, solve_kinetic
from .velocity import parse_velocity_spec


def _fmt(x) -> str:
    return repr(float(x))


def _emit(out_dir: str, tables: dict[str, tuple[str, list]]) -> list[str]:
    """Write {filename: (header, rows)} atomically as a group."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        for name, (header, rows) in tables.items():
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(header + "\n")
                for row in rows:
                    fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                                      for cell in row) + "\n")
            written.append(path)
    except BaseException:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return written


def _velocity_for(spec: str):
    if not spec.startswith(("uniform:", "atoms:")):
        raise ValueError(f"this experiment needs a velocity node model "
                         f"(uniform:... or atoms:...), got {spec!r}")
    return parse_velocity_spec(spec)


def _snapshot_times(t_final: float, count: int) -> np.ndarray:
    if not (t_final > 0):
        raise ValueError("--t must be positive")
    if count < 2:
        raise ValueError("--snapshots must be at least 2")
    return np.linspace(0.0, t_final, count)


def _series_rows(series) -> list:
    rows = []
    for snap in series:
        for xj, pj in zip(snap.x, snap.values):
            rows.append((snap.time, xj, pj))
    return rows


def _cmd_hamiltonian(args) -> dict:
    if args.np < 1:
        raise ValueError("--np must be at least 1")
    if args.p_max < args.p_min:
        raise ValueError("--p-max must be >= --p-min")
    ham = hamiltonian_from_spec(args.model)
    p = np.linspace(args.p_min, args.p_max, args.np)
    h, dh, d2h = ham.derivatives(p)
    return {"h_table.csv": ("p,H,dH,d2H", list(zip(p, h, dh, d2h)))}


def _cmd_legendre(args) -> dict:
    ham = hamiltonian_from_spec(args.model)
    table = ham.legendre_table(q_count=args.nq, p_span=args.p_span, p_count=args.np)
    return {"legendre.csv": ("q,L", list(zip(table.q, table.values)))}


def _hj_config(args, model: str) -> HJRunConfig:
    kind, params = parse_initial_spec(args.init)
    return HJRunConfig(hamiltonian=hamiltonian_from_spec(model), init_kind=kind,
                       init_params=params, x_min=args.xmin, x_max=args.xmax,
                       n_x=args.nx, t_final=args.t, snapshot_count=args.snapshots,
                       cfl=args.cfl)


def _cmd_hj(args) -> dict:
    series = solve_hj(_hj_config(args, args.model))
    return {"hj_series.csv": ("t,x,phi", _series_rows(series))}


def _kinetic_series(args):
    velocity = _velocity_for(args.model)
    kind, params = parse_initial_spec(args.init)
    if args.nx < 8:
        raise ValueError(f"grid too small: --nx {args.nx}, need >= 8")
    if not (args.xmax > args.xmin):
        raise ValueError("--xmax must exceed --xmin")
    if not (args.eps > 0):
        raise ValueError("--eps must be positive")
    dx = (args.xmax - args.xmin) / args.nx
    x = args.xmin + dx * np.arange(args.nx)
    phi0 = initial_profile(kind, params, x, args.xmin, args.xmax)
    times = _snapshot_times(args.t, args.snapshots)
    series = solve_kinetic(x, phi0, velocity, args.eps, times, cfl=args.cfl)
    return series, phi0


def _bounds_rows(series, phi0) -> list:
    report = check_bounds(series, phi0)
    by_time = {}
    for violation in report.violations:
        by_time[violation[0]] = by_time.get(violation[0], 0) + 1
    rows = []
    for snap in report.snapshots:
        rows.append((snap.time, snap.min_phi, snap.max_phi, snap.lip_x,
                     snap.rate_t, snap.lip_v, str(by_time.get(snap.time, 0))))
    return rows


def _cmd_kinetic(args) -> dict:
    series, phi0 = _kinetic_series(args)
    final = series[-1]
    final_rows = []
    for j, xj in enumerate(final.x):
        for i, vi in enumerate(final.velocity.nodes):
            final_rows.append((xj, vi, final.values[j, i]))
    macro_rows = []
    for snap in series:
        macro = macro_phase(snap)
        for xj, pj in zip(macro.x, macro.values):
            macro_rows.append((snap.time, xj, pj))
    return {"kinetic_final.csv": ("x,v,phi", final_rows),
            "macro_series.csv": ("t,x,phi_macro", macro_rows),
            "bounds.csv": ("t,min_phi,max_phi,lip_x,rate_t,lip_v,violations",
                           _bounds_rows(series, phi0))}


def _cmd_bounds(args) -> dict:
    series, phi0 = _kinetic_series(args)
    return {"bounds.csv": ("t,min_phi,max_phi,lip_x,rate_t,lip_v,violations",
                           _bounds_rows(series, phi0))}


def _cmd_converge(args) -> dict:
    velocity = _velocity_for(args.model)
    kind, params = parse_initial_spec(args.init)
    try:
        eps = [float(tok) for tok in args.eps.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"--eps must be a comma-separated float list, got {args.eps!r}")
    table = converge_study(eps, velocity, kind, params, x_min=args.xmin,
                           x_max=args.xmax, n_x=args.nx, t_final=args.t,
                           cfl=args.cfl)
    if not table.monotone:
        print("warning: sup_error column is not strictly decreasing", file=sys.stderr)
    return {"converge.csv": ("eps,sup_error", list(zip(table.eps, table.sup_error)))}


def _cmd_compare(args) -> dict:
    base = hamiltonian_from_spec(args.model)
    if base.source == "classical":
        raise ValueError("compare needs a capped-speed model; its classical twin "
                         "is derived automatically")
    twin = Hamiltonian.classical_eikonal(base.theta2)
    kind, params = parse_initial_spec(args.init)
    out = {}
    for name, ham in (("hj_kinetic.csv", base), ("hj_classical.csv", twin)):
        config = HJRunConfig(hamiltonian=ham, init_kind=kind, init_params=params,
                             x_min=args.xmin, x_max=args.xmax, n_x=args.nx,
                             t_final=args.t, snapshot_count=args.snapshots,
                             cfl=args.cfl)
        out[name] = ("t,x,phi", _series_rows(solve_hj(config)))
    return out


def _add_domain_flags(sub, nx_default: int):
    sub.add_argument("--xmin", type=float, default=-4.0)
    sub.add_argument("--xmax", type=float, default=4.0)
    sub.add_argument("--nx", type=int, default=nx_default)
    sub.add_argument("--t", type=float, default=1.0)
    sub.add_argument("--cfl", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinetic-eikonal",
        description="Experiments around the hydrodynamic limit of kinetic "
                    "transport: effective Hamiltonians, macroscopic "
                    "Hamilton-Jacobi runs, phase-space relaxation runs.")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("hamiltonian", help="tabulate H, H', H''")
    s.add_argument("--model", required=True)
    s.add_argument("--p-min", type=float, default=-5.0)
    s.add_argument("--p-max", type=float, default=5.0)
    s.add_argument("--np", type=int, default=401)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_hamiltonian)

    s = subs.add_parser("legendre", help="tabulate the convex dual L")
    s.add_argument("--model", required=True)
    s.add_argument("--nq", type=int, default=201)
    s.add_argument("--p-span", type=float, default=20.0)
    s.add_argument("--np", type=int, default=4001)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_legendre)

    s = subs.add_parser("hj", help="macroscopic Hamilton-Jacobi run")
    s.add_argument("--model", required=True)
    s.add_argument("--init", default="parabola:a=1")
    _add_domain_flags(s, 400)
    s.add_argument("--snapshots", type=int, default=5)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_hj)

    s = subs.add_parser("kinetic", help="phase-space relaxation run")
    s.add_argument("--model", required=True)
    s.add_argument("--eps", type=float, default=0.125)
    s.add_argument("--init", default="cosine:amp=1")
    _add_domain_flags(s, 200)
    s.add_argument("--snapshots", type=int, default=5)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_kinetic)

    s = subs.add_parser("converge", help="vanishing-eps error study")
    s.add_argument("--model", required=True)
    s.add_argument("--eps", default="0.5,0.25,0.125,0.0625")
    s.add_argument("--init", default="cosine:amp=1")
    _add_domain_flags(s, 200)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_converge)

    s = subs.add_parser("compare", help="capped-speed model vs its quadratic twin")
    s.add_argument("--model", default="coth:vmax=1")
    s.add_argument("--init", default="parabola:a=1")
    _add_domain_flags(s, 400)
    s.add_argument("--snapshots", type=int, default=5)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_compare)

    s = subs.add_parser("bounds", help="phase-space run, monitor report only")
    s.add_argument("--model", required=True)
    s.add_argument("--eps", type=float, default=0.125)
    s.add_argument("--init", default="cosine:amp=1")
    _add_domain_flags(s, 200)
    s.add_argument("--snapshots", type=int, default=5)
    s.add_argument("--out", default=".")
    s.set_defaults(fn=_cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tables = args.fn(args)
        _emit(args.out, tables)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

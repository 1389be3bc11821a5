"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical
failure, 5 enumeration failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .applications import (AtomSystem, ChainSpec, DfsSystem, atom_dark_states,
                           build_chain_network, chain_cooling, chain_dark_prediction,
                           numeric_chain_frequencies, dfs_single_excitation)
from .darkmode import Tolerances, analyze
from .enumeration import ScanGrid, enumerate_configs, instantiate, table_of_verdicts
from .errors import (DarkModeLabError, EigensolverFailure, InvalidSpec, NoConvergence,
                     ParseError, SingularKroneckerSystem, TooLarge, UnstableSystem)
from .network import ensure_valid, load_spec
from .spectral import to_normal_form
from .sweep import Axis, SweepPlan, evaluate, fmt, render_csv, run_sweep

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_ENUMERATE = 0, 2, 3, 4, 5
NUMERICAL = (EigensolverFailure, SingularKroneckerSystem, NoConvergence, UnstableSystem)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _cvec(X) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(X)]


def _tolerances(args) -> Tolerances:
    return Tolerances.from_env(tol_deg=args.tol_deg, tol_rank=args.tol_rank,
                               tol_cpl=args.tol_cpl)


def _load_valid(path):
    spec = load_spec(path)
    ensure_valid(spec)
    return spec


def _read_object(path, keys_required, keys_optional=()):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    allowed = set(keys_required) | set(keys_optional)
    for k in sorted(data):
        if k not in allowed:
            raise ParseError("unknown key", field=k)
    for k in keys_required:
        if k not in data:
            raise ParseError("missing required key", field=k)
    return data


def _complex_list(xs, key):
    out = []
    for x in xs:
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            out.append(complex(x))
        elif isinstance(x, list) and len(x) == 2:
            out.append(complex(float(x[0]), float(x[1])))
        else:
            raise ParseError(f"bad number {x!r}", field=key)
    return out


# subcommands

def cmd_analyze(args) -> int:
    spec = _load_valid(args.spec)
    rep = analyze(spec, _tolerances(args))
    _emit(_json(rep.to_dict()), args.out)
    return EXIT_OK


def cmd_dump_normal_form(args) -> int:
    spec = _load_valid(args.spec)
    _emit(_json(to_normal_form(spec).to_dict()), args.out)
    return EXIT_OK


def cmd_cool(args) -> int:
    spec = _load_valid(args.spec)
    row = evaluate(spec, (), _tolerances(args), args.method)
    _emit(render_csv([row], spec.N), args.out)
    return EXIT_OK


def _parse_override(items):
    out = []
    for path, val in items or ():
        try:
            out.append((path, float(val)))
        except ValueError:
            raise ParseError(f"override value {val!r} is not a number", field=path)
    return tuple(out)


def cmd_sweep(args) -> int:
    spec = _load_valid(args.spec)
    try:
        axes = tuple(Axis(p, float(a), float(b), int(n)) for p, a, b, n in args.param)
        plan = SweepPlan(spec, axes, _parse_override(args.set))
        plan.spec_at(plan.points()[0])
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    rows = run_sweep(plan, _tolerances(args), jobs=args.jobs, method=args.method)
    _emit(render_csv(rows, spec.N), args.out)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    tol = _tolerances(args)
    lines = ["config_id,n_edges,edges,dark_count,cools,best_max_n_f,best_kappa,best_delta"]
    try:
        if args.counts_only:
            for c in enumerate_configs(args.N):
                d = analyze(instantiate(c, args.g, args.eta), tol).dark_count
                lines.append(f"{c.config_id},{c.n_edges},{c.encoding()},{d},,,,")
        else:
            grid = ScanGrid(g=args.g, eta=args.eta, gamma=args.gamma, nbar=args.nbar)
            for v in table_of_verdicts(args.N, grid, tol, jobs=args.jobs):
                c = v.config
                lines.append(",".join([str(c.config_id), str(c.n_edges), c.encoding(),
                                       str(v.dark_count), "yes" if v.cools else "no",
                                       fmt(v.best_max_nf), fmt(v.best_kappa),
                                       fmt(v.best_delta)]))
    except TooLarge:
        raise
    except DarkModeLabError as exc:
        print(f"error: enumeration failed: {exc}", file=sys.stderr)
        return EXIT_ENUMERATE
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_CHAIN_KEYS = ("omega_m", "eta", "g_l1", "g_r1", "delta", "kappa", "gamma", "nbar")


def cmd_chain(args) -> int:
    data = _read_object(args.system, ("N_l", "N_r"), _CHAIN_KEYS)
    try:
        chain = ChainSpec(int(data["N_l"]), int(data["N_r"]),
                          **{k: float(data[k]) for k in _CHAIN_KEYS if k in data})
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    net = build_chain_network(chain)
    pred = chain_dark_prediction(chain, _tolerances(args))
    out = {
        "N_l": chain.N_l,
        "N_r": chain.N_r,
        "dark_count": pred.dark_count,
        "predicted_dark_count": pred.predicted,
        "agree": pred.agree,
        "rationale": pred.rationale,
        "omega_left_closed_form": [float(x) for x in net.omega_left],
        "omega_right_closed_form": [float(x) for x in net.omega_right],
        "omega_left_numeric": [float(x) for x in numeric_chain_frequencies(
            chain.N_l, chain.omega_m, chain.eta)],
        "omega_right_numeric": [float(x) for x in numeric_chain_frequencies(
            chain.N_r, chain.omega_m, chain.eta)],
        "report": pred.report.to_dict(),
    }
    if args.cool:
        out["cooling"] = chain_cooling(chain).to_dict()
    _emit(_json(out), args.out)
    return EXIT_OK


def _state_json(rep) -> dict:
    return {
        "dark_count": rep.dark_count,
        "dark_states": _cvec(rep.dark_states) if rep.dark_count else [],
        "dark_coefficients": _cvec(rep.dark_coefficients) if rep.dark_count else [],
        "bright_states": _cvec(rep.bright_states) if len(rep.bright_states) else [],
        "bright_coefficients": _cvec(rep.bright_coefficients) if len(rep.bright_states) else [],
        "report": rep.report.to_dict(),
    }


def cmd_atoms(args) -> int:
    data = _read_object(args.system, ("drives", "detunings"))
    try:
        atoms = AtomSystem(_complex_list(data["drives"], "drives"),
                           [float(x) for x in data["detunings"]])
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    _emit(_json(_state_json(atom_dark_states(atoms, _tolerances(args)))), args.out)
    return EXIT_OK


def cmd_dfs(args) -> int:
    data = _read_object(args.system, ("omega01", "omega02", "bath", "J1", "J2"))
    try:
        dfs = DfsSystem(float(data["omega01"]), float(data["omega02"]),
                        [float(x) for x in data["bath"]],
                        _complex_list(data["J1"], "J1"), _complex_list(data["J2"], "J2"))
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    _emit(_json(_state_json(dfs_single_excitation(dfs, _tolerances(args)))), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-deg", type=float, default=None,
                        help="relative degeneracy tolerance (env DARKMODE_LAB_TOL_DEG)")
    common.add_argument("--tol-rank", type=float, default=None,
                        help="relative singular-value cutoff (env DARKMODE_LAB_TOL_RANK)")
    common.add_argument("--tol-cpl", type=float, default=None,
                        help="relative zero-coupling threshold (env DARKMODE_LAB_TOL_CPL)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grids")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    p = _Parser(prog="darkmode-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("analyze", parents=[common], help="dark-mode report of a spec")
    s.add_argument("spec")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("dump-normal-form", parents=[common], help="arrowhead form as JSON")
    s.add_argument("spec")
    s.set_defaults(func=cmd_dump_normal_form)

    s = sub.add_parser("cool", parents=[common], help="final phonon numbers as CSV")
    s.add_argument("spec")
    s.add_argument("--method", choices=("kronecker", "schur"), default="kronecker")
    s.set_defaults(func=cmd_cool)

    s = sub.add_parser("sweep", parents=[common], help="grid of final phonon numbers")
    s.add_argument("spec")
    s.add_argument("--param", nargs=4, action="append", required=True,
                   metavar=("PATH", "START", "STOP", "COUNT"),
                   help="swept field, e.g. 'eta[1,2] 0 0.2 21'; give once or twice")
    s.add_argument("--set", nargs=2, action="append", metavar=("PATH", "VALUE"),
                   help="fixed override applied before sweeping")
    s.add_argument("--method", choices=("kronecker", "schur"), default="kronecker")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("enumerate", parents=[common], help="topologies with verdicts")
    s.add_argument("N", type=int)
    s.add_argument("--g", type=float, default=0.1)
    s.add_argument("--eta", type=float, default=0.09)
    s.add_argument("--gamma", type=float, default=1e-5)
    s.add_argument("--nbar", type=float, default=1e3)
    s.add_argument("--counts-only", action="store_true", help="skip the cooling scan")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("chain", parents=[common], help="two-chain dark-mode report")
    s.add_argument("system", help="JSON with N_l, N_r and optional chain parameters")
    s.add_argument("--cool", action="store_true", help="include final phonon numbers")
    s.set_defaults(func=cmd_chain)

    s = sub.add_parser("atoms", parents=[common], help="driven-atom dark states")
    s.add_argument("system", help="JSON with drives and detunings")
    s.set_defaults(func=cmd_atoms)

    s = sub.add_parser("dfs", parents=[common], help="two atoms in a common bath")
    s.add_argument("system", help="JSON with omega01, omega02, bath, J1, J2")
    s.set_defaults(func=cmd_dfs)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.jobs < 1:
            raise ParseError("--jobs must be at least 1")
        return args.func(args)
    except (ParseError, TooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidSpec as exc:
        print("error: invalid spec", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

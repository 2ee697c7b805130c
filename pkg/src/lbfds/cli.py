"""Command line interface: ``lbfds derive|equiv|family|simulate``.

Exit codes: 0 success or equivalent, 1 not equivalent, 2 usage or parse
error, 3 degenerate parameters.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .derive import ClosedFds, Fds, FdsError, fds_close, fds_from_lbs, fingerprint
from .equiv import (DegenerateParameters, check_direct, check_nontrivial, check_trivial, d1q2_family,
                    d1q2_spec, default_s_grid, D1Q2_M, symbol_cross_check, theta_grid)
from .lattice import check_recurrence, constant_field, conserved_totals, delta_field, run_lbs
from .scheme import SchemeError, load_scheme
from .shiftring import to_fraction

EXIT_OK, EXIT_INEQUIVALENT, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}")


def derive_payload(spec, moment: int = 1) -> dict:
    """Canonical derive output; fingerprints cover the FDS bodies only."""
    fds = fds_from_lbs(spec, moment)
    out = {"fds": fds.to_json(), "fingerprint": fds.fingerprint()}
    if spec.equilibria is not None:
        closed = fds_close(fds, spec.equilibria)
        out["closed"] = closed.to_json()
        out["closed_fingerprint"] = closed.fingerprint()
    return out


def parse_derive_output(text: str) -> tuple[Fds, ClosedFds | None]:
    data = json.loads(text)
    fds = Fds.from_json(data["fds"])
    if fingerprint(data["fds"]) != data["fingerprint"]:
        raise FdsError("fingerprint does not match FDS body")
    closed = ClosedFds.from_json(data["closed"]) if "closed" in data else None
    return fds, closed


def cmd_derive(args) -> int:
    spec = load_scheme(args.scheme)
    if not 1 <= args.moment <= spec.N:
        raise UsageError(f"--moment must lie in 1..{spec.N}")
    print(json.dumps(derive_payload(spec, args.moment), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_equiv(args) -> int:
    a, b = load_scheme(args.scheme_a), load_scheme(args.scheme_b)
    if args.mode == "direct":
        report = check_direct(a, b)
    else:
        if a.q != 3 or b.q != 3 or a.d != 1 or b.d != 1 or a.N != 1 or b.N != 1:
            raise UsageError(f"--mode {args.mode} needs two D1Q3 schemes with N=1")
        fn = check_trivial if args.mode == "trivial" else check_nontrivial
        report = fn(a.transport(), b.transport())
        implied = (0, 1, 1) if args.mode == "trivial" else (0, 2, 2)
        for spec, name in ((a, "A"), (b, "B")):
            if spec.S != tuple(Fraction(s) for s in implied):
                report.notes.append(f"scheme {name} has S={[str(s) for s in spec.S]}; "
                                    f"{args.mode} mode uses S=diag{implied}")
    print(json.dumps(report.to_json(), indent=2) if args.json else report.to_text())
    return EXIT_OK if report.equivalent else EXIT_INEQUIVALENT


def cmd_family(args) -> int:
    s_values = default_s_grid() if args.sweep_s else [args.s]
    rows = [d1q2_family(args.m12, args.m21, args.m22, args.eps, s, args.eps_tilde) for s in s_values]
    sym = None
    if args.eps_tilde is None:
        first = rows[-1]
        sym = symbol_cross_check(d1q2_spec(D1Q2_M, args.eps, first.s).closure(),
                                 d1q2_spec(first.M_tilde, args.eps, first.s).closure(), theta_grid(64))
    if args.json:
        payload = {"M_tilde": rows[0].to_json()["M_tilde"], "m11": str(rows[0].m11),
                   "table": [r.to_json() for r in rows]}
        if sym is not None:
            payload["symbol_max_deviation"] = sym.max_deviation
        print(json.dumps(payload, indent=2))
    else:
        Mt = rows[0].M_tilde
        print(f"M~ = [[{Mt[0][0]}, {Mt[0][1]}], [{Mt[1][0]}, {Mt[1][1]}]]")
        print(f"{'s':>6}  {'chi_E equal':>11}  {'closed FDS equal':>16}")
        for r in rows:
            print(f"{str(r.s):>6}  {str(r.charpoly_equal):>11}  {str(r.closed_equal):>16}")
        if sym is not None:
            print(f"symbol check (64 thetas): max deviation {sym.max_deviation:.3e}")
        if args.eps_tilde is not None:
            print("note: eps~ != eps is exploratory; verdicts are reported, not asserted")
    if args.eps_tilde is not None:
        return EXIT_OK
    return EXIT_OK if all(r.verdict for r in rows) else EXIT_INEQUIVALENT


def _initial_field(args, spec):
    L = args.L
    if args.init == "delta":
        fields = [delta_field(L, 0)] + [[Fraction(0)] * L for _ in range(spec.N - 1)]
    elif args.init == "constant":
        fields = [constant_field(L, 1) for _ in range(spec.N)]
    else:
        if not args.init_file:
            raise UsageError("--init file requires --init-file")
        with open(args.init_file) as fh:
            data = json.load(fh)
        if spec.N == 1 and data and not isinstance(data[0], list):
            data = [data]
        fields = [[to_fraction(v) for v in row] for row in data]
        if len(fields) != spec.N or any(len(r) != L for r in fields):
            raise UsageError(f"init file must hold {spec.N} row(s) of {L} rationals")
    return fields


def cmd_simulate(args) -> int:
    spec = load_scheme(args.scheme)
    if spec.equilibria is None:
        raise SchemeError("scheme has no equilibria; simulation needs them")
    if args.L < 1 or args.steps < spec.q - spec.N + 1:
        raise UsageError(f"need L >= 1 and steps >= {spec.q - spec.N + 1}")
    rest = None
    if args.start == "rest":
        rest = [[Fraction(0)] * args.L for _ in range(spec.q - spec.N)]
    traj = run_lbs(spec, _initial_field(args, spec), args.steps, args.L, nonconserved=rest)
    checks = {}
    for i in range(1, spec.N + 1):
        closed = fds_close(fds_from_lbs(spec, i), spec.equilibria)
        checks[i] = check_recurrence(traj, closed)
    totals = conserved_totals(traj)
    conserved = all(t == totals[0] for t in totals)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            traj.to_csv(fh)
        out = sys.stdout
    else:
        traj.to_csv(sys.stdout)
        out = sys.stderr
    if args.json:
        print(json.dumps({
            "L": args.L, "steps": args.steps,
            "residual": {str(i): str(c.max_residual) for i, c in checks.items()},
            "conserved_totals_exact": conserved,
            "totals": [str(t) for t in totals[0]],
        }, indent=2), file=out)
    else:
        for i, c in checks.items():
            loc = "" if c.first_violation is None else f" first violation at level {c.first_violation[0]}, node {c.first_violation[1]}"
            print(f"recurrence residual m{i}: {c.max_residual} over {c.levels_checked} levels{loc}", file=out)
        print(f"conserved totals exact: {conserved} ({', '.join(str(t) for t in totals[0])})", file=out)
    return EXIT_OK if all(c.exact for c in checks.values()) else EXIT_INEQUIVALENT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lbfds", description="Lattice Boltzmann schemes as multi-step finite difference schemes")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="derive the FDS of a scheme file")
    d.add_argument("scheme")
    d.add_argument("--moment", type=int, default=1, help="conserved moment index (1-based)")
    d.add_argument("--json", action="store_true", help="accepted for symmetry; output is always JSON")
    d.set_defaults(func=cmd_derive)

    e = sub.add_parser("equiv", help="check whether two schemes give the same FDS")
    e.add_argument("scheme_a")
    e.add_argument("scheme_b")
    e.add_argument("--mode", choices=("trivial", "nontrivial", "direct"), default="direct")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_equiv)

    f = sub.add_parser("family", help="D1Q2 moment matrices sharing the reference FDS")
    f.add_argument("--m12", type=_rational, required=True)
    f.add_argument("--m21", type=_rational, required=True)
    f.add_argument("--m22", type=_rational, required=True)
    f.add_argument("--eps", type=_rational, required=True)
    f.add_argument("--s", type=_rational, default=Fraction(2))
    f.add_argument("--sweep-s", action="store_true", help="tabulate s = 1/4, 1/2, ..., 2")
    f.add_argument("--eps-tilde", type=_rational, default=None, help="explore eps~ != eps")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_family)

    s = sub.add_parser("simulate", help="run a scheme exactly and check its recurrence")
    s.add_argument("scheme")
    s.add_argument("--L", type=int, default=16)
    s.add_argument("--steps", type=int, default=16)
    s.add_argument("--init", choices=("delta", "constant", "file"), default="delta")
    s.add_argument("--init-file")
    s.add_argument("--start", choices=("equilibrium", "rest"), default="equilibrium",
                   help="non-conserved moments start at equilibrium or at zero")
    s.add_argument("--csv", help="write the trajectory here instead of stdout")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except DegenerateParameters as exc:
        print(f"error: degenerate parameters: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SchemeError, FdsError, UsageError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

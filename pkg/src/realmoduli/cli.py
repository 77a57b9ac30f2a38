"""Command-line entry point.

Exit codes: 0 success, 1 bad input, 2 solve did not converge, 3 the
requested topological class does not exist, 4 the tables leave the cell open.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import holonomy, invariants, solver, tables
from . import index as ym_index
from .errors import InvalidArgument, InvalidState, UndeterminedEntry
from .presentation import CurveTopology, CurveType, Structure

EXIT_OK, EXIT_BAD_INPUT, EXIT_NOT_CONVERGED, EXIT_OBSTRUCTED, EXIT_UNDETERMINED = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _add_topology(p, genus_default=2):
    p.add_argument("--type", dest="curve_type", choices=["0", "1", "2"], default="0")
    p.add_argument("--genus", type=int, default=genus_default)
    p.add_argument("--real-components", type=int, default=None,
                   help="number of real circles (defaults to 0 for type 0, 1 otherwise)")
    p.add_argument("--structure", choices=["real", "quaternionic"], default="real")


def _topology(args) -> CurveTopology:
    kind = {"0": CurveType.TYPE0, "1": CurveType.TYPE1, "2": CurveType.TYPE2}[args.curve_type]
    r = args.real_components
    if r is None:
        r = 0 if kind is CurveType.TYPE0 else 1
    return CurveTopology(kind, args.genus, r)


def _emit(obj, args):
    text = json.dumps(obj, sort_keys=True, indent=2)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_rep(path) -> solver.Representation:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path} is not valid JSON: {exc}") from None
    return solver.Representation.from_json(data)


def cmd_solve(args) -> int:
    top = _topology(args)
    structure = Structure.parse(args.structure)
    reason = invariants.obstruction(top, structure, args.rank, args.degree)
    if reason and not args.force:
        print(f"obstructed: {reason}", file=sys.stderr)
        _emit({"realizable": False, "obstruction": reason}, args)
        return EXIT_OBSTRUCTED
    if structure is Structure.QUATERNIONIC and top.kind is not CurveType.TYPE0 and args.rank % 2:
        raise InvalidArgument(reason)
    res = solver.solve(top, structure, args.rank, args.degree, seed=args.seed, starts=args.starts,
                       tol=args.tol, max_iters=args.max_iters)
    out = res.to_json()
    if reason:
        out["obstruction"] = reason
    _emit(out, args)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_invariants(args) -> int:
    if args.input is None:
        top = _topology(args)
        w1 = None if args.w1 is None else [int(c) for c in args.w1.split(",")]
        reason = invariants.obstruction(top, args.structure, args.rank, args.degree, w1)
        _emit({"realizable": reason is None, "obstruction": reason}, args)
        return EXIT_OK if reason is None else EXIT_OBSTRUCTED
    rep = _load_rep(args.input)
    res = solver.residual(rep)
    out = {
        "residual": res,
        "realizable": invariants.realizable(rep.topology, rep.structure, rep.n, rep.k),
        "pi1_commutant_dim": invariants.pi1_commutant_dimension(rep) if res < solver.SUCCESS_TOL else None,
        "twisted_commutant_dim": invariants.twisted_commutant_dimension(rep) if res < solver.SUCCESS_TOL else None,
    }
    if rep.structure is Structure.REAL and rep.topology.r > 0 and res < solver.SUCCESS_TOL:
        w1 = invariants.stiefel_whitney(rep)
        out["w1"] = list(w1)
        out["class"] = invariants.TopologicalClass(rep.n, rep.k, rep.structure, w1).to_json()
    _emit(out, args)
    return EXIT_OK


def cmd_dim(args) -> int:
    rep = _load_rep(args.input)
    d = solver.estimate_moduli_dimension(rep)
    _emit({"moduli_dim": d, "expected_irreducible": solver.expected_dimension(rep.topology, rep.n)}, args)
    return EXIT_OK


def cmd_index(args) -> int:
    n, k, g = args.rank, args.degree, args.genus
    _emit({"min_index": ym_index.min_index(n, k, g), "lower_bound": ym_index.index_lower_bound(n, g),
           "morse_iso_range": ym_index.morse_iso_range(n, g)}, args)
    return EXIT_OK


def cmd_holonomy(args) -> int:
    rep = _load_rep(args.input)
    cx = holonomy.build_complex(rep.topology)
    conn = holonomy.rep_to_connection(rep, cx)
    d = holonomy.defects(conn, cx)
    back = holonomy.connection_to_rep(conn, cx)
    _, dist = solver.orbit_align(back, rep, seed=args.seed)
    out = d.to_json()
    out.update(path_independence=holonomy.path_independence_check(conn, cx), round_trip_distance=dist,
               vertices=cx.n_vertices, edges=len(cx.edges), faces=len(cx.faces))
    _emit(out, args)
    return EXIT_OK


def cmd_tables(args) -> int:
    top = _topology(args)
    q = tables.TableQuery(args.structure, top, args.space, args.pi, args.rank, fixed_det=args.fixed_det,
                          k=args.degree)
    _emit(tables.lookup(q).to_json(), args)
    return EXIT_OK


def cmd_equiv(args) -> int:
    a, b = _load_rep(args.input), _load_rep(args.other)
    ta = np.array(solver.trace_invariants(a, args.max_len))
    tb = np.array(solver.trace_invariants(b, args.max_len))
    _, dist = solver.orbit_align(a, b, seed=args.seed)
    _emit({"trace_distance": float(np.max(np.abs(ta - tb))) if ta.size else 0.0, "orbit_distance": dist}, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="realmoduli", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="search for a point of the representation variety")
    _add_topology(p)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--tol", type=float, default=solver.SUCCESS_TOL)
    p.add_argument("--max-iters", type=int, default=3000)
    p.add_argument("--force", action="store_true", help="run even when the class is obstructed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("invariants", help="topological and irreducibility data")
    _add_topology(p)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--w1", help="comma separated w1 values, one per real circle")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("dim", help="local dimension of the moduli space at a solution")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("index", help="lower bound on Yang-Mills indices")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("holonomy", help="representation -> lattice connection -> representation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("tables", help="homotopy groups from the reference tables")
    _add_topology(p)
    p.add_argument("--space", choices=[s.value for s in tables.Space], required=True)
    p.add_argument("--pi", type=int, choices=[1, 2], required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--degree", type=int, default=None, help="bundle degree (moduli queries)")
    p.add_argument("--fixed-det", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("equiv", help="compare two representations up to gauge")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_equiv)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UndeterminedEntry as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except (InvalidArgument, InvalidState, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``srn-order``.

Exit codes: 0 success, 1 invalid preorder or violations found, 2 usage or
parse errors.
"""

from __future__ import annotations

import argparse
import re
import sys
from typing import Optional, Sequence

from . import report as rep
from .coupling import AffineRelation, coupled_ensemble, oracle_check_conditions, simulate_coupled
from .linalg import conservation_basis
from .network import ParseError, load_network
from .order import ab_for, analyze
from .search import SearchOptions, default_workers, search


class UsageError(Exception):
    pass


def parse_ints(text: str) -> tuple[int, ...]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def read_matrix(path: str) -> tuple[tuple[int, ...], ...]:
    """One integer row per line; blank lines and ``#`` comments ignored."""
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    rows.append(parse_ints(line))
                except argparse.ArgumentTypeError:
                    raise UsageError(f"{path}:{lineno}: expected integers") from None
    except OSError as exc:
        raise UsageError(f"cannot read matrix file: {exc}") from None
    if len({len(r) for r in rows}) > 1:
        raise UsageError(f"{path}: rows have different lengths")
    return tuple(rows)


def _load(path):
    try:
        return load_network(path)
    except OSError as exc:
        raise UsageError(f"cannot read network file: {exc}") from None


def _matrix_for(net, path):
    M = read_matrix(path)
    if M and len(M[0]) != net.dimension:
        raise UsageError(f"matrix has {len(M[0])} columns but the network has {net.dimension} species")
    return M


def _relation(net, args) -> AffineRelation:
    M = _matrix_for(net, args.matrix)
    offset = args.offset or ()
    if offset and len(offset) != len(M):
        raise UsageError("--offset needs one entry per matrix row")
    return AffineRelation(M, offset)


def _state(net, values, flag):
    if len(values) != net.dimension:
        raise UsageError(f"{flag} needs {net.dimension} entries")
    if min(values) < 0:
        raise UsageError(f"{flag} must be non-negative")
    return values


def _kinetics(kin, path):
    if kin is None:
        raise UsageError(f"{path} has no kX/kY rate annotations")
    return kin


def cmd_check(args, out) -> int:
    net, kin = _load(args.network)
    M = _matrix_for(net, args.matrix)
    if any(not any(r) for r in M):
        raise UsageError("matrix has a zero row")
    C = conservation_basis(net).rows
    cm, result, structure = analyze(net, M, C, canonical=not args.no_canonicalize)
    if args.format == "json":
        ab = ab_for(cm, C, net.dimension)
        out.write(rep.render_json(rep.check_dict(net, M, cm, result, structure, ab, kin)))
    elif args.format == "dot":
        out.write(rep.check_dot(net, structure))
    else:
        out.write(rep.check_text(net, M, cm, result, structure, kin))
    return 0 if result.valid else 1


def cmd_search(args, out) -> int:
    net, _ = _load(args.network)
    workers = args.workers if args.workers is not None else default_workers()
    result = search(net, SearchOptions(include_dominated=args.include_dominated, workers=workers))
    out.write(rep.render(result, args.format))
    return 0


def cmd_simulate(args, out) -> int:
    net, kin = _load(args.network)
    kin = _kinetics(kin, args.network)
    rel = _relation(net, args)
    x0 = _state(net, args.x0, "--x0")
    y0 = _state(net, args.y0, "--y0")
    if not rel.holds(x0, y0):
        raise UsageError("the initial pair is not in the relation")
    if args.trajectories < 1 or args.t_max < 0:
        raise UsageError("--trajectories must be positive and --t-max non-negative")
    summary = coupled_ensemble(net, kin, rel, x0, y0, args.t_max, args.trajectories, args.seed,
                               checkpoints=(args.t_max,), max_events=args.max_events)
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            for k in range(args.trajectories):
                traj = simulate_coupled(net, kin, rel, x0, y0, args.t_max, args.seed,
                                        args.max_events, index=k)
                fh.write(f"# trajectory {k} terminated_by={traj.terminated_by}\n")
                fh.write(traj.to_tsv())
    out.write(f"trajectories: {summary.trajectories}\n")
    out.write(f"relation violations: {summary.relation_violations}\n")
    out.write(f"hypothesis violations: {summary.hypothesis_violations}\n")
    out.write("terminated: " + ", ".join(f"{k}={v}" for k, v in sorted(summary.guards.items())) + "\n")
    xm = summary.x_samples[:, -1, :].mean(axis=0)
    ym = summary.y_samples[:, -1, :].mean(axis=0)
    for name, a, b in zip(net.names, xm, ym):
        out.write(f"mean at t={args.t_max:g}: {name} X={a:.4f} Y={b:.4f}\n")
    if summary.first_violation:
        out.write(f"first violation: {summary.first_violation}\n")
    return 1 if summary.violations else 0


def cmd_oracle(args, out) -> int:
    net, kin = _load(args.network)
    kin = _kinetics(kin, args.network)
    rel = _relation(net, args)
    anchor = _state(net, args.anchor, "--anchor")
    if args.radius < 0:
        raise UsageError("--radius must be non-negative")
    result = oracle_check_conditions(net, kin, rel, args.radius, anchor)
    out.write(f"states in box: {result.states}\n")
    out.write(f"related pairs: {result.pairs}\n")
    out.write(f"violations: {result.violation_count}\n")
    for v in result.violations:
        out.write(f"  ({v.condition}) x={v.x} y={v.y} xi={v.xi} qX={v.rate_x} qY={v.rate_y}\n")
    return 1 if result.violation_count else 0


def cmd_conservation(args, out) -> int:
    net, _ = _load(args.network)
    basis = conservation_basis(net)
    out.write(f"species: {' '.join(net.names)}\n")
    out.write(f"stoichiometric dimension: {basis.s}\n")
    out.write(f"conservation laws: {len(basis.rows)}\n")
    for row in basis.rows:
        out.write(" ".join(str(v) for v in row) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="srn-order", description="Preordering structures of reaction networks.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check one preorder matrix")
    c.add_argument("network")
    c.add_argument("--matrix", required=True)
    c.add_argument("--no-canonicalize", action="store_true")
    c.add_argument("--format", choices=rep.FORMATS, default="text")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("search", help="enumerate simple preordering structures")
    s.add_argument("network")
    s.add_argument("--include-dominated", action="store_true")
    s.add_argument("--workers", type=int)
    s.add_argument("--format", choices=rep.FORMATS, default="text")
    s.set_defaults(func=cmd_search)

    m = sub.add_parser("simulate", help="run coupled trajectories")
    m.add_argument("network")
    m.add_argument("--matrix", required=True)
    m.add_argument("--offset", type=parse_ints)
    m.add_argument("--x0", type=parse_ints, required=True)
    m.add_argument("--y0", type=parse_ints, required=True)
    m.add_argument("--t-max", type=float, required=True)
    m.add_argument("--trajectories", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--max-events", type=int)
    m.add_argument("--export", help="write every trajectory as tab-separated records")
    m.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="brute-force the coupling hypotheses in a box")
    o.add_argument("network")
    o.add_argument("--matrix", required=True)
    o.add_argument("--offset", type=parse_ints)
    o.add_argument("--anchor", type=parse_ints, required=True)
    o.add_argument("--radius", type=int, required=True)
    o.set_defaults(func=cmd_oracle)

    k = sub.add_parser("conservation", help="print the conservation laws")
    k.add_argument("network")
    k.set_defaults(func=cmd_conservation)
    return p


def run_cli(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "workers", None) is not None and args.workers < 1:
            raise UsageError("--workers must be positive")
        return args.func(args, out)
    except (UsageError, ParseError, ValueError) as exc:
        err.write(f"srn-order: error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

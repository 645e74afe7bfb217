"""Command line front end.

Every solving subcommand prints ``value=<v> optimal=<0|1> X=<i,j,...>`` with
1-based input element indices.  Exit status: 0 optimal, 2 time limit hit
(incumbent printed), 3 rank reducible (value=inf), 1 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, instances, oracle
from .matroid import Instance, lex_min_basis
from .search import (MODES, SearchStats, Solution, SolverConfig, prepare,
                     solve_blocker, solve_inclusion_interdiction, solve_interdiction,
                     target_from_gamma)

EXIT_OK, EXIT_USAGE, EXIT_TIMEOUT, EXIT_RANK = 0, 1, 2, 3


def _fmt(v) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return str(int(v))


def _line(value, optimal: bool, X) -> str:
    return f"value={_fmt(value)} optimal={int(optimal)} X={','.join(str(x + 1) for x in X)}"


def _exit_code(sol: Solution) -> int:
    if sol.rank_reducible:
        return EXIT_RANK
    return EXIT_OK if sol.proven_optimal else EXIT_TIMEOUT


def _config(args) -> SolverConfig:
    return SolverConfig(
        time_limit=args.time_limit,
        mode=args.mode,
        max_prefix_bits=args.max_prefix_bits,
        mem_limit=args.mem_limit,
        round_k=getattr(args, "round_k", 1) or 1,
        greedy=not args.no_greedy,
        preprocess=not args.no_preprocess,
    )


def _write_stats(args, stats: SearchStats | None) -> None:
    if args.stats_json and stats is not None:
        Path(args.stats_json).write_text(json.dumps(stats.to_json(), indent=2) + "\n")


def _load(args) -> Instance:
    return instances.parse(args.instance, scale=args.scale)


# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    sol, stats = solve_interdiction(_load(args), _config(args))
    print(_line(sol.value, sol.proven_optimal, sol.X))
    _write_stats(args, stats)
    return _exit_code(sol)


def cmd_blocker(args) -> int:
    inst = _load(args)
    if args.target is not None:
        R = args.target
    elif args.gamma is not None:
        R = target_from_gamma(inst, args.gamma)
    elif inst.target is not None:
        R = inst.target
    else:
        print("blocker needs --target, --gamma or a 'target' line in the file", file=sys.stderr)
        return EXIT_USAGE
    sol, stats = solve_blocker(inst, R, _config(args))
    print(f"target={R}", file=sys.stderr)
    print(_line(sol.cost, sol.proven_optimal, sol.X))
    _write_stats(args, stats)
    return EXIT_OK if sol.proven_optimal else EXIT_TIMEOUT


def cmd_inclusion(args) -> int:
    sol, stats = solve_inclusion_interdiction(_load(args), _config(args))
    print(_line(sol.value, sol.proven_optimal, sol.X))
    _write_stats(args, stats)
    return _exit_code(sol)


def cmd_bound(args) -> int:
    norm = _load(args)
    cfg = _config(args)
    prep = prepare(norm, norm.C, cfg)
    table = bounds.build_table(prep.bound_inst, prep.space, args.prefix_bits, cfg.round_k,
                               prep.allowed, cfg.mem_limit)
    F0 = lex_min_basis(norm.matroid, norm.w).weight
    v = table.query(0, table.rounded(norm.C), table.phi0, 0)
    ub = math.inf if math.isinf(v) else F0 + v
    print(f"bound={_fmt(ub)} base={F0} p={args.prefix_bits} K={cfg.round_k}")
    if args.dump:
        bounds.dump(table, args.dump, norm.m, norm.C)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args)
    sol = oracle.brute_force_interdiction(inst, cap=args.cap)
    print(_line(sol.value, True, sol.X))
    return EXIT_RANK if sol.rank_reducible else EXIT_OK


def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.family == "random":
        inst = instances.generate_random(instances.GenParams(
            args.n, args.density, args.gamma, args.c_max, args.w_max, seed))
    elif args.family == "comb":
        inst = instances.generate_comb(args.k, args.M)
    else:
        if args.sizes:
            a = [int(x) for x in args.sizes.split(",")]
            p = [int(x) for x in args.profits.split(",")]
        else:
            rng = np.random.default_rng(seed)
            a = [int(x) for x in rng.integers(1, 20, size=args.n, endpoint=True)]
            p = [int(x) for x in rng.integers(0, 30, size=args.n, endpoint=True)]
        budget = args.budget if args.budget is not None else sum(a) // 2
        inst = instances.generate_knapsack_reduction(a, p, budget)
    text = instances.serialize_text(inst)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


BENCH_COLUMNS = ("file", "value", "optimal", "nodes", "cpu_s", "root_lb", "root_ub")


def cmd_bench(args) -> int:
    files = sorted(Path(args.directory).glob("*.mi"))
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(BENCH_COLUMNS)
        cfg = _config(args)
        for path in files:
            sol, stats = solve_interdiction(instances.parse(path, scale=args.scale), cfg)
            writer.writerow([path.name, _fmt(sol.value), int(sol.proven_optimal), stats.nodes,
                             f"{stats.cpu_seconds:.4f}",
                             "" if stats.root_lb is None else _fmt(stats.root_lb),
                             "" if stats.root_ub is None else _fmt(stats.root_ub)])
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("solver options")
    g.add_argument("--time-limit", type=float, default=math.inf, metavar="S")
    g.add_argument("--mode", choices=MODES, default="parallel")
    g.add_argument("--max-prefix-bits", type=int, default=8, metavar="P")
    g.add_argument("--mem-limit", type=int, default=1 << 30, metavar="BYTES")
    g.add_argument("--no-greedy", action="store_true")
    g.add_argument("--no-preprocess", action="store_true")
    g.add_argument("--no-bounds", dest="mode", action="store_const", const="no-bounds",
                   help="shorthand for --mode no-bounds")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--stats-json", metavar="PATH")
    g.add_argument("--scale", type=int, default=None,
                   help="accept decimals in the file and multiply all numbers by this factor")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="matint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="maximise the minimum basis weight")
    s.add_argument("instance")
    s.add_argument("--round-k", type=int, default=1, metavar="K")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("blocker", parents=[common], help="cheapest X reaching a target weight")
    s.add_argument("instance")
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--target", type=int, metavar="R")
    grp.add_argument("--gamma", type=str, metavar="G",
                     help="R = ceil((max basis - min basis) * G + min basis)")
    s.add_argument("--round-k", type=int, default=1, metavar="K")
    s.set_defaults(func=cmd_blocker)

    s = sub.add_parser("inclusion", parents=[common], help="forced-inclusion interdiction via duality")
    s.add_argument("instance")
    s.set_defaults(func=cmd_inclusion)

    s = sub.add_parser("bound", parents=[common], help="root upper bound of the DP")
    s.add_argument("instance")
    s.add_argument("--prefix-bits", type=int, default=0, metavar="P")
    s.add_argument("--round-k", type=int, default=1, metavar="K")
    s.add_argument("--dump", metavar="PATH", help="write the table to a binary cache file")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("oracle", parents=[common], help="exhaustive reference solve")
    s.add_argument("instance")
    s.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("generate", parents=[common], help="write a generated instance")
    s.add_argument("family", choices=("random", "comb", "knapsack"))
    s.add_argument("-o", "--output")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--density", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--c-max", type=int, default=10)
    s.add_argument("--w-max", type=int, default=100)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--M", type=int, default=10)
    s.add_argument("--sizes", help="knapsack item sizes, comma separated")
    s.add_argument("--profits", help="knapsack item profits, comma separated")
    s.add_argument("--budget", type=int)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("bench", parents=[common], help="solve every *.mi file in a directory")
    s.add_argument("directory")
    s.add_argument("-o", "--output", help="CSV path (default stdout)")
    s.add_argument("--round-k", type=int, default=1, metavar="K")
    s.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command line front-end.

Exit codes: 0 success, 1 parse error, 2 width/table/memory guard,
3 internal error or oracle mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .cnf import DimacsError, read_dimacs
from .decomposition import HEURISTICS, TdFormatError, read_td_file
from .dp import DEFAULT_MEMORY_CAP, MemoryLimitExceeded, PassError
from .oracle import OracleLimitExceeded, brute_force
from .proj import DEFAULT_TABLE_CAP, TableLimitExceeded, format_proj_table
from .sat import format_sat_table
from .solver import DEFAULT_MAX_WIDTH, InvalidDecomposition, WidthLimitExceeded, count

EXIT_OK, EXIT_PARSE, EXIT_GUARD, EXIT_INTERNAL = 0, 1, 2, 3
GUARDS = (WidthLimitExceeded, TableLimitExceeded, MemoryLimitExceeded)


def _int_list(text: str) -> list[int]:
    values = [int(x) for x in text.replace(",", " ").split()]
    return values[:values.index(0)] if 0 in values else values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tdpmc",
        description="Exact projected model counting by dynamic programming on tree decompositions.")
    p.add_argument("input", help="DIMACS CNF file; 'c p show ... 0' lines declare the projection")
    proj = p.add_mutually_exclusive_group()
    proj.add_argument("--projection", help="comma separated projection variables (overrides show lines)")
    proj.add_argument("--projection-file", help="file with whitespace separated projection variables")
    p.add_argument("--heuristic", choices=HEURISTICS, default="min-fill")
    p.add_argument("--seed", type=int, default=None, help="randomize elimination tie-breaking")
    p.add_argument("--td", help="PACE .td decomposition to use instead of the heuristic (bag 1 is the root)")
    p.add_argument("--max-width", type=int, default=DEFAULT_MAX_WIDTH)
    p.add_argument("--table-cap", type=int, default=DEFAULT_TABLE_CAP,
                   help="maximum number of sub-buckets per PROJ table")
    p.add_argument("--memory-cap", type=int, default=DEFAULT_MEMORY_CAP,
                   help="maximum predicted bytes of SAT tables")
    p.add_argument("--force", action="store_true", help="disable width, table and memory guards")
    p.add_argument("--mode", choices=("pmc", "sat", "stats-only"), default="pmc")
    p.add_argument("--check-oracle", action="store_true",
                   help="compare against brute-force enumeration (small instances only)")
    p.add_argument("--dump-tables", action="store_true", help="write all tables to stderr")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _dump(result, out):
    for t in range(len(result.ntd)):
        kind, var = result.ntd.node_type[t], result.ntd.variable[t]
        label = f"{kind} {var}" if var is not None else kind
        print(f"c node t{t + 1} ({label}) bag {list(result.ntd.bags[t])}", file=out)
        print(format_sat_table(result.sat_tables[t]), file=out)
        if result.proj_tables:
            print(format_proj_table(result.proj_tables[t], result.purged_tables[t]), file=out)


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="c %(levelname)s: %(message)s", stream=sys.stderr)
    if args.max_width < 0:
        print("c error: --max-width must be nonnegative", file=sys.stderr)
        return EXIT_PARSE

    try:
        instance = read_dimacs(args.input)
        if args.projection is not None:
            instance = instance.with_projection(_int_list(args.projection))
        elif args.projection_file is not None:
            with open(args.projection_file) as fh:
                instance = instance.with_projection(_int_list(fh.read()))
        td = read_td_file(args.td) if args.td else None
    except (DimacsError, TdFormatError, ValueError, OSError) as exc:
        print(f"c error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    mode = {"stats-only": "stats"}.get(args.mode, args.mode)
    try:
        result = count(instance, td, heuristic=args.heuristic, seed=args.seed,
                       max_width=None if args.force else args.max_width,
                       table_cap=None if args.force else args.table_cap,
                       memory_cap=None if args.force else args.memory_cap,
                       mode=mode)
    except InvalidDecomposition as exc:
        print(f"c error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GUARDS as exc:
        print(f"c error: {exc} (use --force to override)", file=sys.stderr)
        return EXIT_GUARD
    except PassError as exc:
        if isinstance(exc.__cause__, GUARDS):
            print(f"c error: {exc} (use --force to override)", file=sys.stderr)
            return EXIT_GUARD
        print(f"c error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    print(f"c o width {result.width}", file=out)
    print(f"c o nodes {result.nodes}", file=out)
    print(f"c o heuristic {'td-import' if td is not None else args.heuristic}", file=out)
    if mode == "stats":
        return EXIT_OK
    print(f"c o time-sat {result.time_sat_ms:.0f}", file=out)
    if args.dump_tables:
        _dump(result, sys.stderr)
    if mode == "sat":
        print(f"s {'SATISFIABLE' if result.satisfiable else 'UNSATISFIABLE'}", file=out)
        return EXIT_OK
    print(f"c o time-proj {result.time_proj_ms:.0f}", file=out)

    if args.check_oracle:
        try:
            expected = brute_force(instance).projected_count
        except OracleLimitExceeded as exc:
            print(f"c o oracle skipped ({exc})", file=out)
        else:
            if expected != result.count:
                print(f"c o oracle-mismatch dp={result.count} oracle={expected}", file=out)
                print(f"s pmc {result.count}", file=out)
                return EXIT_INTERNAL
            print("c o oracle agrees", file=out)
    print(f"s pmc {result.count}", file=out)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

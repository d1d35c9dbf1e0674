"""End-to-end pipeline: decompose, SAT pass, purge, PROJ pass, count."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .cnf import PmcInstance
from .decomposition import (NiceTreeDecomposition, TreeDecomposition, build_primal,
                            heuristic_td, make_nice, validate_td)
from .dp import DEFAULT_MEMORY_CAP, check_memory, run_pass
from .proj import DEFAULT_TABLE_CAP, check_table_cap, final_count, make_proj_algorithm
from .sat import is_satisfiable, purge, sat_table_algorithm

DEFAULT_MAX_WIDTH = 12


class WidthLimitExceeded(RuntimeError):
    pass


class InvalidDecomposition(ValueError):
    pass


@dataclass
class CountResult:
    count: int | None
    satisfiable: bool | None
    width: int
    nodes: int
    ntd: NiceTreeDecomposition
    time_sat_ms: float = 0.0
    time_proj_ms: float = 0.0
    max_sat_rows: int = 0
    max_proj_rows: int = 0
    sat_tables: list = field(default_factory=list, repr=False)
    purged_tables: list = field(default_factory=list, repr=False)
    proj_tables: list = field(default_factory=list, repr=False)


def decompose(instance: PmcInstance, td: TreeDecomposition | None = None,
              heuristic: str = "min-fill", seed: int | None = None) -> NiceTreeDecomposition:
    graph = build_primal(instance.formula)
    if td is None:
        td = heuristic_td(graph, heuristic, seed)
    else:
        # bag vertices outside var(F) would be counted twice
        td = td.restrict(graph.vertices)
        report = validate_td(td, graph)
        if not report.ok:
            raise InvalidDecomposition(f"imported decomposition is invalid: {report}")
    return make_nice(td)


def count(instance: PmcInstance, td: TreeDecomposition | None = None, *,
          ntd: NiceTreeDecomposition | None = None,
          heuristic: str = "min-fill", seed: int | None = None,
          max_width: int | None = None, table_cap: int | None = DEFAULT_TABLE_CAP,
          memory_cap: int | None = DEFAULT_MEMORY_CAP, mode: str = "pmc",
          literal: bool = False) -> CountResult:
    """Projected model count of ``instance``.

    ``mode='sat'`` stops after the first pass and ``mode='stats'`` after the
    decomposition; ``count`` is None in both.
    """
    if ntd is None:
        ntd = decompose(instance, td, heuristic, seed)
    if max_width is not None and ntd.width > max_width:
        raise WidthLimitExceeded(f"decomposition width {ntd.width} exceeds the limit {max_width}")
    result = CountResult(None, None, ntd.width, len(ntd), ntd)
    if mode == "stats":
        return result
    check_memory(ntd, memory_cap)

    start = time.perf_counter()
    sat_tables = run_pass(instance, ntd, sat_table_algorithm)
    result.satisfiable = is_satisfiable(sat_tables, ntd)
    purged = purge(sat_tables, ntd)
    result.time_sat_ms = (time.perf_counter() - start) * 1000
    result.sat_tables, result.purged_tables = sat_tables, purged
    result.max_sat_rows = max(len(t) for t in sat_tables)
    if mode == "sat":
        return result

    start = time.perf_counter()
    result.max_proj_rows = check_table_cap(purged, ntd, instance.active_projection, table_cap)
    proj_tables = run_pass(instance, ntd, make_proj_algorithm(table_cap, literal), prev=purged)
    result.time_proj_ms = (time.perf_counter() - start) * 1000
    result.proj_tables = proj_tables
    result.count = final_count(proj_tables[ntd.root], len(instance.free_projection))
    return result


def projected_count(instance: PmcInstance, **kwargs) -> int:
    return count(instance, **kwargs).count

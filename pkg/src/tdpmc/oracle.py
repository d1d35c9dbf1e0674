"""Brute-force reference counts and explicit extension enumeration.

Nothing here reuses the dynamic-programming code paths: counts come from
enumerating every assignment, and extensions are rebuilt from the stored
origin links of SAT tables by plain recursion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cnf import PmcInstance

MAX_ORACLE_VARS = 25
MAX_EXTENSIONS = 200_000


class OracleLimitExceeded(RuntimeError):
    pass


@dataclass
class OracleResult:
    model_count: int
    projected_count: int
    models: list[frozenset[int]] = field(default_factory=list)


def brute_force(instance: PmcInstance, max_vars: int = MAX_ORACLE_VARS,
                keep_models: int = 0) -> OracleResult:
    formula = instance.formula
    variables = sorted(formula.variables)
    n = len(variables)
    if n > max_vars:
        raise OracleLimitExceeded(f"{n} variables exceed the oracle limit {max_vars}")
    bit = {v: i for i, v in enumerate(variables)}
    assignments = np.arange(1 << n, dtype=np.int64)
    alive = np.ones(1 << n, dtype=bool)
    for clause in formula.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in clause:
            value = (assignments >> bit[abs(lit)]) & 1
            sat |= value.astype(bool) if lit > 0 else value == 0
        alive &= sat
    models = assignments[alive]
    model_count = int(models.size)
    pmask = sum(1 << bit[v] for v in instance.active_projection)
    projected = int(np.unique(models & pmask).size)
    free = len(instance.free_projection)
    result = OracleResult(model_count << free if model_count else 0,
                          projected << free if projected else 0)
    for m in models[:keep_models].tolist():
        result.models.append(frozenset(v for v in variables if m >> bit[v] & 1))
    return result


# Extensions: frozensets of (node, interpretation) pairs, one pair per node
# of the subtree they hang below.

def _ext_below(tables, ntd, node, row, memo, cap):
    key = (node, row)
    if key in memo:
        return memo[key]
    table = tables[node]
    pair = (node, table.interpretation(row))
    kids = ntd.children[node]
    if not kids:
        result = [frozenset([pair])]
    else:
        result = []
        for origin in table.origins[row]:
            partial = [frozenset([pair])]
            for child, child_row in zip(kids, origin):
                below = _ext_below(tables, ntd, child, child_row, memo, cap)
                partial = [x | y for x in partial for y in below]
                if len(partial) > cap:
                    raise OracleLimitExceeded("too many extensions")
            result.extend(partial)
        if len(result) > cap:
            raise OracleLimitExceeded("too many extensions")
    memo[key] = result
    return result


def extensions_below(tables, ntd, node: int, row: int, cap: int = MAX_EXTENSIONS,
                     memo: dict | None = None) -> list[frozenset]:
    """All extensions below ``node`` of one row, following stored origins."""
    return _ext_below(tables, ntd, node, row, {} if memo is None else memo, cap)


def root_extensions(tables, ntd, cap: int = MAX_EXTENSIONS, memo: dict | None = None) -> list[frozenset]:
    memo = {} if memo is None else memo
    out = []
    for row in range(len(tables[ntd.root])):
        out.extend(_ext_below(tables, ntd, ntd.root, row, memo, cap))
    return out


def satisfiable_extensions(tables, ntd, node: int, rows: Iterable[int],
                           cap: int = MAX_EXTENSIONS) -> list[frozenset]:
    """Extensions below ``node`` of the given rows contained in a root extension."""
    memo: dict = {}
    below = set(ntd.subtree(node))
    complete = {frozenset(p for p in y if p[0] in below) for y in root_extensions(tables, ntd, cap, memo)}
    out = []
    for row in rows:
        out.extend(x for x in extensions_below(tables, ntd, node, row, cap, memo) if x in complete)
    return out


def interpretations(family: Iterable[frozenset]) -> set[frozenset[int]]:
    return {frozenset().union(*(j for _, j in x)) for x in family}


def projected_interpretations(family: Iterable[frozenset], projection) -> set[frozenset[int]]:
    projection = frozenset(projection)
    return {j & projection for j in interpretations(family)}


def enumerate_extensions(tables, ntd, node: int, sigma: Sequence[int], projection,
                         cap: int = MAX_EXTENSIONS) -> dict[int, set[frozenset[int]]]:
    """Projected interpretations of the satisfiable extensions of each row of ``sigma``."""
    return {row: projected_interpretations(satisfiable_extensions(tables, ntd, node, [row], cap), projection)
            for row in sigma}


def intersection_count(tables, ntd, node: int, sigma: Sequence[int], projection,
                       cap: int = MAX_EXTENSIONS) -> int:
    per_row = enumerate_extensions(tables, ntd, node, sigma, projection, cap)
    return len(set.intersection(*per_row.values()))


class ExtensionIndex:
    """Projected interpretations below every (node, row), from one root enumeration.

    For a kept row this equals the projected interpretations of its
    satisfiable extensions; rows that occur in no root extension map to
    the empty set.
    """

    def __init__(self, tables, ntd, projection, cap: int = MAX_EXTENSIONS):
        projection = frozenset(projection)
        self.below: dict[tuple[int, frozenset], set[frozenset[int]]] = {}
        self.exts = root_extensions(tables, ntd, cap)
        for y in self.exts:
            chosen = dict(y)
            acc: list[frozenset] = []
            for t in range(len(ntd)):  # post-order
                acc.append(chosen[t].union(*(acc[c] for c in ntd.children[t])))
                self.below.setdefault((t, chosen[t]), set()).add(acc[t] & projection)

    def occurs(self, node: int, interpretation) -> bool:
        return (node, frozenset(interpretation)) in self.below

    def projected(self, node: int, interpretation) -> set[frozenset[int]]:
        return self.below.get((node, frozenset(interpretation)), set())

"""Second pass: projected counts over sub-buckets of purged SAT tables.

A bucket groups the rows of a purged SAT table that agree on the projected
variables of the bag; a sub-bucket is any nonempty subset of one bucket.
The PROJ table of a node stores, for every sub-bucket, the number of
projected interpretations shared by all of its rows (the intersection
count).  Counts are Python integers, so they never overflow.

``pcnt``, ``ipmc`` and ``sipmc`` follow the inclusion-exclusion recurrences
term by term and are exponential in the number of origins.  The table
algorithm evaluates the same sums with subset-sum transforms per bucket and
falls back to the term-by-term recurrence if a sign check fails.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from .decomposition import LEAF, NiceTreeDecomposition
from .dp import PassContext
from .sat import SatTable

DEFAULT_TABLE_CAP = 2 ** 20


class TableLimitExceeded(RuntimeError):
    """A PROJ table would hold more sub-buckets than the configured cap."""


@dataclass
class ProjTable:
    buckets: list[tuple[int, ...]]
    # counts[b][mask]: count of the sub-bucket selecting bucket positions in mask
    counts: list[np.ndarray]
    where: dict[int, tuple[int, int]] = field(init=False, repr=False)

    def __post_init__(self):
        self.where = {row: (b, pos) for b, rows in enumerate(self.buckets)
                      for pos, row in enumerate(rows)}

    def locate(self, sigma: Iterable[int]) -> tuple[int, int] | None:
        """(bucket, mask) of ``sigma``, or None if it is not a sub-bucket."""
        bucket, mask = None, 0
        for row in sigma:
            if row not in self.where:
                return None
            b, pos = self.where[row]
            if bucket is None:
                bucket = b
            elif b != bucket:
                return None
            mask |= 1 << pos
        return None if bucket is None else (bucket, mask)

    def get(self, sigma: Iterable[int]) -> int:
        loc = self.locate(sigma)
        return 0 if loc is None else int(self.counts[loc[0]][loc[1]])

    def __getitem__(self, sigma) -> int:
        loc = self.locate(sigma)
        if loc is None:
            raise KeyError(tuple(sigma))
        return int(self.counts[loc[0]][loc[1]])

    def __contains__(self, sigma) -> bool:
        return self.locate(sigma) is not None

    def __len__(self):
        return sum((1 << len(rows)) - 1 for rows in self.buckets)

    def items(self):
        for rows, counts in zip(self.buckets, self.counts):
            for mask in range(1, 1 << len(rows)):
                yield tuple(r for p, r in enumerate(rows) if mask >> p & 1), int(counts[mask])


def buckets(table: SatTable, projection: Iterable[int]) -> list[tuple[int, ...]]:
    """Partition row indices by their interpretation restricted to ``projection``."""
    projection = set(projection)
    pmask = sum(1 << b for b, v in enumerate(table.bag) if v in projection)
    groups: dict[int, list[int]] = {}
    for i, m in enumerate(table.rows):
        groups.setdefault(m & pmask, []).append(i)
    return [tuple(groups[k]) for k in sorted(groups)]


def sub_bucket_count(bs: Sequence[Sequence[int]]) -> int:
    return sum((1 << len(b)) - 1 for b in bs)


def sub_buckets(bs: Sequence[Sequence[int]], cap: int | None = None) -> list[tuple[int, ...]]:
    total = sub_bucket_count(bs)
    if cap is not None and total > cap:
        raise TableLimitExceeded(f"{total} sub-buckets exceed the table cap {cap}")
    out = []
    for b in bs:
        for r in range(1, len(b) + 1):
            out.extend(itertools.combinations(b, r))
    return out


def origins_of(table: SatTable, sigma: Iterable[int]) -> set[tuple[int, ...]]:
    return {o for row in sigma for o in table.origins[row]}


def sipmc(child_tables: Sequence[ProjTable], origins: Iterable[tuple[int, ...]]) -> int:
    """Product over children of the stored count of the i-th origin components."""
    origins = list(origins)
    result = 1
    for i, child in enumerate(child_tables):
        result *= child.get({o[i] for o in origins})
        if not result:
            break
    return result


def pcnt(table: SatTable, sigma: Iterable[int], child_tables: Sequence[ProjTable]) -> int:
    """Projected count of ``sigma`` by inclusion-exclusion over its origins."""
    origins = sorted(origins_of(table, sigma))
    total = 0
    for r in range(1, len(origins) + 1):
        sign = 1 if r % 2 else -1
        for subset in itertools.combinations(origins, r):
            total += sign * sipmc(child_tables, subset)
    return total


def ipmc(node_type: str, table: SatTable, sigma: Iterable[int],
         child_tables: Sequence[ProjTable], memo: dict | None = None) -> int:
    """Intersection count of ``sigma``; the absolute value is taken outermost only."""
    if node_type == LEAF:
        return 1
    sigma = tuple(sorted(sigma))
    if memo is None:
        memo = {}
    if sigma in memo:
        return memo[sigma]
    total = pcnt(table, sigma, child_tables)
    for r in range(1, len(sigma)):
        sign = -1 if r % 2 else 1
        for rho in itertools.combinations(sigma, r):
            total += sign * ipmc(node_type, table, rho, child_tables, memo)
    memo[sigma] = abs(total)
    return memo[sigma]


def _zeta(values: np.ndarray, bits: int):
    """In-place subset sums: values[S] = sum of values[T] for T ⊆ S."""
    for i in range(bits):
        view = values.reshape(-1, 2, 1 << i)
        view[:, 1, :] += view[:, 0, :]


def _mobius(values: np.ndarray, bits: int):
    for i in range(bits):
        view = values.reshape(-1, 2, 1 << i)
        view[:, 1, :] -= view[:, 0, :]


def _subset_or(bits: Sequence[int]) -> np.ndarray:
    """Entry S is the bitwise OR of bits[j] over the members j of S."""
    out = np.zeros(1, dtype=np.int64)
    for b in bits:
        out = np.concatenate((out, out | b))
    return out


def _parity(n: int) -> np.ndarray:
    out = np.zeros(1, dtype=bool)
    for _ in range(n):
        out = np.concatenate((out, ~out))
    return out


def _dtype(max_value: int, bits: int):
    # int64 is exact as long as no partial sum can reach 2^62
    return np.int64 if max_value.bit_length() + bits + 2 <= 62 else object


def _union_counts(group: list[tuple[int, ...]], key: tuple[int, ...],
                  child_tables: Sequence[ProjTable]) -> np.ndarray:
    """Signed sums of stored child counts over subsets of one origin group.

    Entry S is the sum over nonempty O ⊆ S of (-1)^(|O|-1) * sipmc(O); subsets
    mixing child buckets contribute zero and are never formed.
    """
    m = len(group)
    bound = 1
    for i, child in enumerate(child_tables):
        bound *= int(child.counts[key[i]].max())
    dtype = _dtype(bound, m)
    values = np.ones(1 << m, dtype=dtype)
    for i, child in enumerate(child_tables):
        masks = _subset_or([1 << child.where[o[i]][1] for o in group])
        values = values * child.counts[key[i]].astype(dtype)[masks]
    values[~_parity(m)] *= -1
    values[0] = 0
    _zeta(values, m)
    return values


def _bucket_counts(node_type: str, table: SatTable, rows: tuple[int, ...],
                   child_tables: Sequence[ProjTable]) -> np.ndarray:
    n = len(rows)
    if node_type == LEAF:
        counts = np.ones(1 << n, dtype=np.int64)
        counts[0] = 0
        return counts

    groups: dict[tuple[int, ...], dict[tuple[int, ...], int]] = {}
    row_bits: list[dict[tuple[int, ...], int]] = []
    for row in rows:
        bits: dict[tuple[int, ...], int] = {}
        for o in table.origins[row]:
            key = tuple(child.where[o[i]][0] for i, child in enumerate(child_tables))
            members = groups.setdefault(key, {})
            idx = members.setdefault(o, len(members))
            bits[key] = bits.get(key, 0) | 1 << idx
        row_bits.append(bits)

    parts = []
    for key, members in groups.items():
        unions = _union_counts(list(members), key, child_tables)
        parts.append(unions[_subset_or([b.get(key, 0) for b in row_bits])])
    bound = sum(int(np.abs(p).max()) for p in parts)
    dtype = _dtype(bound, n)
    pc = np.zeros(1 << n, dtype=dtype)
    for p in parts:
        pc += p.astype(dtype)

    # Möbius inversion gives (-1)^(|σ|-1) * ipmc(σ) when the counts are consistent
    _mobius(pc, n)
    odd = _parity(n)
    if np.any((pc > 0) & ~odd) or np.any((pc < 0) & odd):
        memo: dict = {}
        counts = np.zeros(1 << n, dtype=object)
        for s in range(1, 1 << n):
            counts[s] = ipmc(node_type, table, [rows[p] for p in range(n) if s >> p & 1],
                             child_tables, memo)
        return counts
    return np.abs(pc)


def proj_table_algorithm(ctx: PassContext, table_cap: int | None = DEFAULT_TABLE_CAP,
                         literal: bool = False) -> ProjTable:
    """PROJ table of a node; ``ctx.prev`` holds the purged SAT tables."""
    table: SatTable = ctx.prev[ctx.node]
    bs = buckets(table, ctx.projection)
    total = sub_bucket_count(bs)
    if table_cap is not None and total > table_cap:
        raise TableLimitExceeded(f"node {ctx.node}: {total} sub-buckets exceed the table cap {table_cap}")
    counts = []
    for rows in bs:
        if literal:
            memo: dict = {}
            counts.append(np.array([0] + [
                ipmc(ctx.node_type, table, [rows[p] for p in range(len(rows)) if s >> p & 1],
                     ctx.child_tables, memo)
                for s in range(1, 1 << len(rows))], dtype=object))
        else:
            counts.append(_bucket_counts(ctx.node_type, table, rows, ctx.child_tables))
    return ProjTable(bs, counts)


def make_proj_algorithm(table_cap: int | None = DEFAULT_TABLE_CAP, literal: bool = False):
    return partial(proj_table_algorithm, table_cap=table_cap, literal=literal)


def check_table_cap(sat_tables: Sequence[SatTable], ntd: NiceTreeDecomposition,
                    projection: Iterable[int], cap: int | None = DEFAULT_TABLE_CAP) -> int:
    """Largest per-node sub-bucket count; raises if it exceeds ``cap``."""
    projection = frozenset(projection)
    worst = 0
    for t, table in enumerate(sat_tables):
        total = sub_bucket_count(buckets(table, projection.intersection(ntd.bags[t])))
        if cap is not None and total > cap:
            raise TableLimitExceeded(f"node {t}: {total} sub-buckets exceed the table cap {cap}")
        worst = max(worst, total)
    return worst


def final_count(root_table: ProjTable, free_vars: int = 0) -> int:
    """Projected model count read off the root's PROJ table."""
    total = sum(c for _, c in root_table.items())
    return total << free_vars if len(root_table) else 0


def format_proj_table(proj: ProjTable, sat_table: SatTable,
                      names: dict[int, str] | None = None) -> str:
    names = names or {}

    def show(row):
        return "{" + ",".join(names.get(v, str(v)) for v in sorted(sat_table.interpretation(row))) + "}"

    lines = ["i  sigma  c"]
    for i, (sigma, c) in enumerate(proj.items(), 1):
        lines.append(f"{i}  {{{', '.join(show(r) for r in sigma)}}}  {c}")
    return "\n".join(lines)


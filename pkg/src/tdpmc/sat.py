"""First pass: bag-restricted models with stored origins, and purging.

A row is a bitmask over the node's bag, bit ``i`` standing for the ``i``-th
smallest variable of the bag.  Rows are kept sorted by mask, which also fixes
the row numbering used in debug dumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .decomposition import INTRODUCE, JOIN, LEAF, REMOVE, NiceTreeDecomposition
from .dp import PassContext


@dataclass
class SatTable:
    bag: tuple[int, ...]
    rows: list[int]
    # origins[i]: tuples of child row indices that produced row i
    origins: list[list[tuple[int, ...]]]
    index: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {mask: i for i, mask in enumerate(self.rows)}

    def __len__(self):
        return len(self.rows)

    def interpretation(self, i: int) -> frozenset[int]:
        mask = self.rows[i]
        return frozenset(v for b, v in enumerate(self.bag) if mask >> b & 1)

    def interpretations(self) -> list[frozenset[int]]:
        return [self.interpretation(i) for i in range(len(self.rows))]

    def find(self, interpretation) -> int | None:
        pos = {v: b for b, v in enumerate(self.bag)}
        return self.index.get(sum(1 << pos[v] for v in interpretation))


def clause_masks(clauses, bag):
    """(positive, negative) bitmask pairs of clauses over ``bag``."""
    pos = {v: b for b, v in enumerate(bag)}
    out = []
    for clause in clauses:
        p = n = 0
        for lit in clause:
            if lit > 0:
                p |= 1 << pos[lit]
            else:
                n |= 1 << pos[-lit]
        out.append((p, n))
    return out


def satisfies(mask: int, masks) -> bool:
    return all(mask & p or ~mask & n for p, n in masks)


def _finish(bag, found: dict[int, list]) -> SatTable:
    rows = sorted(found)
    return SatTable(tuple(bag), rows, [found[r] for r in rows])


def sat_table_algorithm(ctx: PassContext) -> SatTable:
    bag = ctx.bag
    if ctx.node_type == LEAF:
        # only the empty clause lies in an empty bag
        ok = all(ctx.clauses)
        return SatTable(bag, [0] if ok else [], [[()]] if ok else [])

    if ctx.node_type == JOIN:
        left, right = ctx.child_tables
        found = {m: [(i, right.index[m])] for i, m in enumerate(left.rows) if m in right.index}
        return _finish(bag, found)

    (child,) = ctx.child_tables
    found: dict[int, list] = {}
    if ctx.node_type == INTRODUCE:
        bit = bag.index(ctx.variable)
        low = (1 << bit) - 1
        masks = clause_masks(ctx.clauses, bag)
        for j, m in enumerate(child.rows):
            base = (m & low) | ((m & ~low) << 1)
            for k in (base, base | 1 << bit):
                if satisfies(k, masks):
                    found.setdefault(k, []).append((j,))
        return _finish(bag, found)

    if ctx.node_type == REMOVE:
        bit = child.bag.index(ctx.variable)
        low = (1 << bit) - 1
        for j, m in enumerate(child.rows):
            k = (m & low) | ((m >> (bit + 1)) << bit)
            found.setdefault(k, []).append((j,))
        return _finish(bag, found)

    raise ValueError(f"unknown node type {ctx.node_type!r}")


def purge(tables: list[SatTable], ntd: NiceTreeDecomposition) -> list[SatTable]:
    """Keep only rows reachable from the root table through origin links."""
    keep = [set() for _ in tables]
    keep[ntd.root] = set(range(len(tables[ntd.root])))
    for t in reversed(range(len(ntd))):
        kids = ntd.children[t]
        for i in keep[t]:
            for origin in tables[t].origins[i]:
                for c, j in zip(kids, origin):
                    keep[c].add(j)

    remap = [{old: new for new, old in enumerate(sorted(k))} for k in keep]
    purged = []
    for t, table in enumerate(tables):
        kids = ntd.children[t]
        kept = sorted(keep[t])
        origins = [[tuple(remap[c][j] for c, j in zip(kids, o)) for o in table.origins[i]]
                   for i in kept]
        purged.append(SatTable(table.bag, [table.rows[i] for i in kept], origins))
    return purged


def is_satisfiable(tables: list[SatTable], ntd: NiceTreeDecomposition) -> bool:
    return len(tables[ntd.root]) > 0


def format_sat_table(table: SatTable, names: dict[int, str] | None = None) -> str:
    names = names or {}
    lines = ["i  J"]
    for i, interp in enumerate(table.interpretations(), 1):
        members = ",".join(names.get(v, str(v)) for v in sorted(interp))
        lines.append(f"{i}  {{{members}}}")
    return "\n".join(lines)

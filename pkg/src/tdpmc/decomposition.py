"""Primal graphs, tree decompositions and their nice normal form.

Node identifiers of a :class:`NiceTreeDecomposition` are assigned in
post-order, so iterating ``range(len(ntd))`` visits children before parents
and the root is always the last node.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cnf import Formula

LEAF, INTRODUCE, REMOVE, JOIN = "leaf", "int", "rem", "join"
HEURISTICS = ("min-fill", "min-degree")


class TdFormatError(ValueError):
    """Raised on malformed PACE ``.td`` input."""


@dataclass(frozen=True)
class PrimalGraph:
    vertices: frozenset[int]
    adjacency: dict[int, frozenset[int]] = field(compare=False, repr=False)

    @property
    def edges(self) -> set[frozenset[int]]:
        return {frozenset((u, v)) for u, ns in self.adjacency.items() for v in ns}

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])


def build_primal(formula: Formula) -> PrimalGraph:
    adjacency: dict[int, set[int]] = {v: set() for v in formula.variables}
    for clause in formula.clauses:
        vs = {abs(l) for l in clause}
        for u, v in itertools.combinations(vs, 2):
            adjacency[u].add(v)
            adjacency[v].add(u)
    return PrimalGraph(frozenset(adjacency), {v: frozenset(ns) for v, ns in sorted(adjacency.items())})


def _fill_in(adj, v):
    ns = sorted(adj[v])
    return sum(1 for a, b in itertools.combinations(ns, 2) if b not in adj[a])


def elimination_ordering(graph: PrimalGraph, heuristic: str = "min-fill",
                         seed: int | None = None) -> list[int]:
    """Greedy elimination ordering.

    Ties on the heuristic score go to the smallest variable id, or to a
    seeded random rank when ``seed`` is given.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    adj = {v: set(ns) for v, ns in graph.adjacency.items()}
    if seed is None:
        rank = {v: v for v in adj}
    else:
        shuffled = sorted(adj)
        random.Random(seed).shuffle(shuffled)
        rank = {v: i for i, v in enumerate(shuffled)}
    score = _fill_in if heuristic == "min-fill" else (lambda a, v: len(a[v]))

    order = []
    while adj:
        v = min(adj, key=lambda u: (score(adj, u), rank[u]))
        ns = adj.pop(v)
        for a, b in itertools.combinations(ns, 2):
            adj[a].add(b)
            adj[b].add(a)
        for u in ns:
            adj[u].discard(v)
        order.append(v)
    return order


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted tree of bags.

    ``edges`` keeps the order in which tree edges were given; a node's
    children are its neighbours away from the root in that order.
    """
    bags: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]
    root: int = 0
    num_vertices: int | None = None
    children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    parent: tuple[int | None, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.bags)
        neighbours: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        children: list[list[int]] = [[] for _ in range(n)]
        parent: list[int | None] = [None] * n
        seen = {self.root} if n else set()
        stack = [self.root] if n else []
        while stack:
            u = stack.pop()
            for v in neighbours[u]:
                if v not in seen:
                    seen.add(v)
                    parent[v] = u
                    children[u].append(v)
                    stack.append(v)
        if len(seen) != n or len(self.edges) != max(n - 1, 0):
            raise ValueError("tree decomposition graph is not a tree")
        object.__setattr__(self, "children", tuple(map(tuple, children)))
        object.__setattr__(self, "parent", tuple(parent))

    def __len__(self):
        return len(self.bags)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def postorder(self) -> list[int]:
        out, stack = [], [(self.root, False)] if self.bags else []
        while stack:
            node, done = stack.pop()
            if done:
                out.append(node)
                continue
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(self.children[node]))
        return out

    def restrict(self, vertices: Iterable[int]) -> "TreeDecomposition":
        keep = frozenset(vertices)
        return TreeDecomposition(tuple(b & keep for b in self.bags), self.edges,
                                 self.root, self.num_vertices)


def td_from_ordering(graph: PrimalGraph, ordering: Sequence[int]) -> TreeDecomposition:
    """Bucket-elimination tree decomposition; subsumed bags are contracted."""
    if set(ordering) != graph.vertices or len(ordering) != len(graph.vertices):
        raise ValueError("ordering is not a permutation of the graph's vertices")
    if not ordering:
        return TreeDecomposition((frozenset(),), (), 0, 0)

    position = {v: i for i, v in enumerate(ordering)}
    adj = {v: set(ns) for v, ns in graph.adjacency.items()}
    bags: list[set[int]] = []
    parent: list[int | None] = []
    for v in ordering:
        later = adj.pop(v)
        bags.append({v} | later)
        parent.append(position[min(later, key=position.__getitem__)] if later else None)
        for a, b in itertools.combinations(later, 2):
            adj[a].add(b)
            adj[b].add(a)
        for u in later:
            adj[u].discard(v)

    # components of a disconnected graph each yield a root; chain them
    roots = [i for i, p in enumerate(parent) if p is None]
    for r in roots[:-1]:
        parent[r] = roots[-1]
    root = roots[-1]

    # contract bags contained in a neighbouring bag
    alive = [True] * len(bags)
    nbrs: list[set[int]] = [set() for _ in bags]
    for i, p in enumerate(parent):
        if p is not None:
            nbrs[i].add(p)
            nbrs[p].add(i)
    changed = True
    while changed:
        changed = False
        for i in range(len(bags)):
            if not alive[i]:
                continue
            target = next((j for j in sorted(nbrs[i]) if bags[i] <= bags[j]), None)
            if target is None:
                continue
            for j in nbrs[i]:
                nbrs[j].discard(i)
                if j != target:
                    nbrs[j].add(target)
                    nbrs[target].add(j)
            nbrs[i] = set()
            alive[i] = False
            if root == i:
                root = target
            changed = True

    ids = {old: new for new, old in enumerate(i for i in range(len(bags)) if alive[i])}
    new_bags = tuple(frozenset(bags[old]) for old in ids)
    # orient edges away from the root for a deterministic child order
    edges, seen, queue = [], {root}, [root]
    while queue:
        u = queue.pop(0)
        for v in sorted(nbrs[u]):
            if v not in seen:
                seen.add(v)
                edges.append((ids[u], ids[v]))
                queue.append(v)
    return TreeDecomposition(new_bags, tuple(edges), ids[root], max(graph.vertices))


def heuristic_td(graph: PrimalGraph, heuristic: str = "min-fill",
                 seed: int | None = None) -> TreeDecomposition:
    return td_from_ordering(graph, elimination_ordering(graph, heuristic, seed))


@dataclass(frozen=True)
class NiceTreeDecomposition:
    bags: tuple[tuple[int, ...], ...]  # sorted by variable id
    children: tuple[tuple[int, ...], ...]
    node_type: tuple[str, ...]
    variable: tuple[int | None, ...]  # introduced / removed variable

    @property
    def root(self) -> int:
        return len(self.bags) - 1

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def __len__(self):
        return len(self.bags)

    def parents(self) -> list[int | None]:
        parent: list[int | None] = [None] * len(self)
        for t, cs in enumerate(self.children):
            for c in cs:
                parent[c] = t
        return parent

    def subtree(self, node: int) -> list[int]:
        """Nodes below and including ``node``, in post-order."""
        out, stack = [], [node]
        while stack:
            t = stack.pop()
            out.append(t)
            stack.extend(self.children[t])
        return sorted(out)

    def as_tree_decomposition(self) -> TreeDecomposition:
        edges = tuple((t, c) for t in range(len(self)) for c in self.children[t])
        return TreeDecomposition(tuple(frozenset(b) for b in self.bags), edges, self.root)


class _Builder:
    def __init__(self):
        self.bags: list[frozenset[int]] = []
        self.children: list[list[int]] = []

    def add(self, bag, children=()):
        self.bags.append(frozenset(bag))
        self.children.append(list(children))
        return len(self.bags) - 1

    def move(self, top, frm, to):
        """Chain rem/int nodes above ``top`` taking bag ``frm`` to ``to``."""
        bag = set(frm)
        for v in sorted(frm - to):
            bag.discard(v)
            top = self.add(bag, [top])
        for v in sorted(to - frm):
            bag.add(v)
            top = self.add(bag, [top])
        return top

    def first_leaf(self, node):
        parent = None
        while self.children[node]:
            parent, node = node, self.children[node][0]
        return parent, node


def make_nice(td: TreeDecomposition) -> NiceTreeDecomposition:
    """Normalize ``td`` to a nice tree decomposition of the same width.

    Edges between equal bags are contracted, wider joins become chains of
    binary joins, and empty-bag nodes with several children are resolved by
    stacking the child subtrees (an empty bag cannot be a join).
    """
    b = _Builder()
    top: dict[int, int] = {}
    for node in td.postorder():
        bag = td.bags[node]
        branches = [b.move(top[c], td.bags[c], bag) for c in td.children[node]]
        if not branches:
            branches = [b.move(b.add(()), frozenset(), bag)]
        if len(branches) == 1:
            top[node] = branches[0]
        elif bag:
            joined = branches[0]
            for other in branches[1:]:
                joined = b.add(bag, [joined, other])
            top[node] = joined
        else:
            current = branches[0]
            for other in branches[1:]:
                if not b.children[other]:
                    continue
                parent, _ = b.first_leaf(other)
                b.children[parent][0] = current
                current = other
            top[node] = current
    root = b.move(top[td.root], td.bags[td.root], frozenset()) if td.bags else b.add(())

    # renumber reachable nodes in post-order
    order, stack = [], [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in reversed(b.children[node]))
    new_id = {old: new for new, old in enumerate(order)}
    bags, children, types, variables = [], [], [], []
    for old in order:
        bag = b.bags[old]
        kids = tuple(new_id[c] for c in b.children[old])
        var = None
        if not kids:
            kind = LEAF
        elif len(kids) == 2:
            kind = JOIN
        else:
            below = b.bags[b.children[old][0]]
            if len(bag) > len(below):
                kind, (var,) = INTRODUCE, tuple(bag - below)
            else:
                kind, (var,) = REMOVE, tuple(below - bag)
        bags.append(tuple(sorted(bag)))
        children.append(kids)
        types.append(kind)
        variables.append(var)
    return NiceTreeDecomposition(tuple(bags), tuple(children), tuple(types), tuple(variables))


@dataclass
class ValidationReport:
    uncovered_vertices: list[int] = field(default_factory=list)
    uncovered_edges: list[tuple[int, int]] = field(default_factory=list)
    disconnected: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.uncovered_vertices or self.uncovered_edges or self.disconnected)

    def __bool__(self):
        return self.ok


def validate_td(td: TreeDecomposition | NiceTreeDecomposition, graph: PrimalGraph) -> ValidationReport:
    if isinstance(td, NiceTreeDecomposition):
        td = td.as_tree_decomposition()
    report = ValidationReport()
    covered = frozenset().union(*td.bags) if td.bags else frozenset()
    report.uncovered_vertices = sorted(graph.vertices - covered)
    for u, v in sorted(tuple(sorted(e)) for e in graph.edges):
        if not any(u in bag and v in bag for bag in td.bags):
            report.uncovered_edges.append((u, v))
    # a vertex's bags are connected iff exactly one of them has no parent containing it
    tops: dict[int, int] = {}
    for node, bag in enumerate(td.bags):
        p = td.parent[node]
        for v in bag:
            if p is None or v not in td.bags[p]:
                tops[v] = tops.get(v, 0) + 1
    report.disconnected = sorted(v for v, n in tops.items() if n > 1)
    return report


def audit_nice(ntd: NiceTreeDecomposition) -> list[str]:
    """Check every node against its type's bag relation; return problems found."""
    problems = []
    if ntd.bags[ntd.root]:
        problems.append("root bag not empty")
    for t, kind in enumerate(ntd.node_type):
        bag, kids = set(ntd.bags[t]), ntd.children[t]
        if any(c >= t for c in kids):
            problems.append(f"node {t}: not in post-order")
        if kind == LEAF:
            ok = not kids and not bag
        elif kind == JOIN:
            ok = len(kids) == 2 and bool(bag) and all(set(ntd.bags[c]) == bag for c in kids)
        elif kind == INTRODUCE:
            below = set(ntd.bags[kids[0]]) if len(kids) == 1 else None
            ok = below is not None and below <= bag and bag - below == {ntd.variable[t]}
        elif kind == REMOVE:
            below = set(ntd.bags[kids[0]]) if len(kids) == 1 else None
            ok = below is not None and bag <= below and below - bag == {ntd.variable[t]}
        else:
            ok = False
        if not ok:
            problems.append(f"node {t}: bag relation violated for type {kind}")
    return problems


def read_td(text: str) -> TreeDecomposition:
    """Parse PACE 2017 ``.td`` text; bag 1 becomes the root."""
    header = None
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "s":
                if header is not None or len(parts) != 5 or parts[1] != "td":
                    raise TdFormatError(f"line {lineno}: malformed solution line")
                header = tuple(int(x) for x in parts[2:])
            elif parts[0] == "b":
                if header is None:
                    raise TdFormatError(f"line {lineno}: bag before 's td' line")
                bag_id = int(parts[1])
                if bag_id in bags:
                    raise TdFormatError(f"line {lineno}: duplicate bag id {bag_id}")
                if not 1 <= bag_id <= header[0]:
                    raise TdFormatError(f"line {lineno}: bag id {bag_id} out of range")
                bag = frozenset(int(x) for x in parts[2:])
                if any(not 1 <= v <= header[2] for v in bag):
                    raise TdFormatError(f"line {lineno}: vertex out of range")
                bags[bag_id] = bag
            else:
                if header is None or len(parts) != 2:
                    raise TdFormatError(f"line {lineno}: malformed edge line")
                u, v = int(parts[0]), int(parts[1])
                if not (1 <= u <= header[0] and 1 <= v <= header[0]):
                    raise TdFormatError(f"line {lineno}: edge endpoint out of range")
                edges.append((u - 1, v - 1))
        except ValueError as exc:
            if isinstance(exc, TdFormatError):
                raise
            raise TdFormatError(f"line {lineno}: non-integer token") from None
    if header is None:
        raise TdFormatError("missing 's td' line")
    num_bags, max_bag, num_vertices = header
    if len(bags) != num_bags:
        raise TdFormatError(f"header declares {num_bags} bags, found {len(bags)}")
    if num_bags == 0:
        raise TdFormatError("decomposition without bags")
    if max((len(x) for x in bags.values()), default=0) != max_bag:
        raise TdFormatError(f"header declares maximum bag size {max_bag}")
    try:
        return TreeDecomposition(tuple(bags[i] for i in range(1, num_bags + 1)),
                                 tuple(edges), 0, num_vertices)
    except ValueError as exc:
        raise TdFormatError(str(exc)) from None


def write_td(td: TreeDecomposition, num_vertices: int | None = None) -> str:
    if num_vertices is None:
        num_vertices = td.num_vertices
    if num_vertices is None:
        num_vertices = max((max(b) for b in td.bags if b), default=0)
    # bag 1 must be the root on re-import
    order = [td.root] + [i for i in range(len(td)) if i != td.root]
    bag_id = {node: i + 1 for i, node in enumerate(order)}
    lines = [f"s td {len(td)} {td.width + 1} {num_vertices}"]
    for node in order:
        lines.append(" ".join(["b", str(bag_id[node]), *map(str, sorted(td.bags[node]))]))
    for u, v in td.edges:
        lines.append(f"{bag_id[u]} {bag_id[v]}")
    return "\n".join(lines) + "\n"


def read_td_file(path) -> TreeDecomposition:
    with open(path) as fh:
        return read_td(fh.read())

"""Instance generators and fixtures shared by the test modules."""

import random
from pathlib import Path

from tdpmc.cnf import Formula, PmcInstance, read_dimacs

FIXTURES = Path(__file__).parent / "fixtures"
A, B, P1, P2 = 1, 2, 3, 4
NAMES = {A: "a", B: "b", P1: "p1", P2: "p2"}


def example1() -> PmcInstance:
    return read_dimacs(FIXTURES / "example1.cnf")


def interp(*names) -> frozenset:
    lookup = {v: k for k, v in NAMES.items()}
    return frozenset(lookup[n] for n in names)


def random_3cnf(rng: random.Random, n: int, m: int, window: int | None = None) -> Formula:
    """m random 3-clauses over n variables; ``window`` bounds the id span per clause."""
    clauses = []
    for _ in range(m):
        if window is None:
            pool = range(1, n + 1)
        else:
            lo = rng.randint(1, max(1, n - window + 1))
            pool = range(lo, min(n, lo + window - 1) + 1)
        clauses.append([v * rng.choice((1, -1)) for v in rng.sample(pool, min(3, len(pool)))])
    return Formula.from_lists(clauses, n)


def random_projection(rng: random.Random, formula: Formula, kind: str) -> frozenset:
    if kind == "none":
        return frozenset()
    if kind == "all":
        return formula.variables
    if kind == "declared":
        return frozenset(range(1, formula.num_vars + 1))
    return frozenset(v for v in range(1, formula.num_vars + 1) if rng.random() < 0.5)


PROJECTION_KINDS = ("none", "all", "random", "declared")


def random_suite(seed: int, count: int, vars_range=(5, 15), clause_range=(5, 40), window=4):
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(*vars_range)
        m = rng.randint(*clause_range)
        formula = random_3cnf(rng, n, m, window)
        kind = PROJECTION_KINDS[k % len(PROJECTION_KINDS)]
        out.append(PmcInstance(formula, random_projection(rng, formula, kind)))
    return out

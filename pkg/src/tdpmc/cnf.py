"""CNF formulas, projected model counting instances and DIMACS I/O.

Literals are nonzero DIMACS integers: ``v`` is the variable ``v`` and ``-v``
its negation.  Clauses are frozensets of literals, formulas hold a
deduplicated tuple of clauses in first-occurrence order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

log = logging.getLogger(__name__)


class DimacsError(ValueError):
    """Raised on malformed DIMACS input."""


@dataclass(frozen=True)
class Formula:
    clauses: tuple[frozenset[int], ...]
    num_vars: int

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("negative variable count")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    @classmethod
    def from_lists(cls, clauses: Iterable[Iterable[int]], num_vars: int | None = None) -> "Formula":
        unique = dict.fromkeys(frozenset(c) for c in clauses)
        if num_vars is None:
            num_vars = max((abs(l) for c in unique for l in c), default=0)
        return cls(tuple(unique), num_vars)

    @property
    def variables(self) -> frozenset[int]:
        """var(F): variables that actually occur in some clause."""
        return frozenset(abs(l) for c in self.clauses for l in c)

    @property
    def has_empty_clause(self) -> bool:
        return any(not c for c in self.clauses)

    def __len__(self):
        return len(self.clauses)


@dataclass(frozen=True)
class PmcInstance:
    formula: Formula
    projection: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        bad = [v for v in self.projection if not 1 <= v <= self.formula.num_vars]
        if bad:
            raise ValueError(f"projection variables {sorted(bad)} not declared")

    @property
    def active_projection(self) -> frozenset[int]:
        """P ∩ var(F), the part of the projection the dynamic program sees."""
        return self.projection & self.formula.variables

    @property
    def free_projection(self) -> frozenset[int]:
        """Projected variables that occur in no clause; each doubles the count."""
        return self.projection - self.formula.variables

    def with_projection(self, projection: Iterable[int]) -> "PmcInstance":
        return PmcInstance(self.formula, frozenset(projection))


def formula_under_assignment(formula: Formula, true_vars: Iterable[int],
                             scope: Iterable[int]) -> Formula:
    """Return F restricted by the assignment induced by ``true_vars`` over ``scope``.

    Clauses with a literal set to 1 are dropped; literals set to 0 are removed
    from the remaining clauses.  An empty clause in the result means a conflict.
    """
    scope = frozenset(scope)
    true_vars = frozenset(true_vars) & scope
    true_lits = set(true_vars) | {-v for v in scope - true_vars}
    reduced = []
    for clause in formula.clauses:
        if clause & true_lits:
            continue
        reduced.append(frozenset(l for l in clause if abs(l) not in scope))
    return Formula.from_lists(reduced, formula.num_vars)


def is_model(formula: Formula, interpretation: Iterable[int]) -> bool:
    """True iff the interpretation (over var(F)) satisfies every clause."""
    return not formula_under_assignment(formula, interpretation, formula.variables).clauses


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise DimacsError(f"line {lineno}: non-integer token ({exc})") from None


def parse_dimacs(text: str) -> PmcInstance:
    """Parse DIMACS CNF with optional ``c p show ... 0`` projection lines.

    Without a show line every declared variable is projected, so the result
    is plain model counting.
    """
    if not text.strip():
        raise DimacsError("empty input")
    num_vars = num_clauses = None
    clauses: list[list[int]] = []
    current: list[int] = []
    shown: set[int] | None = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if parts[:3] == ["c", "p", "show"]:
                values = _ints(parts[3:], lineno)
                if 0 in values:
                    values = values[:values.index(0)]
                if shown is None:
                    shown = set()
                shown.update(values)
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            num_vars, num_clauses = _ints(parts[2:], lineno)
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if line.startswith("%"):
            # some benchmark generators terminate files with '%'
            break
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for lit in _ints(line.split(), lineno):
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError(f"line {lineno}: literal {lit} exceeds {num_vars} variables")
            else:
                current.append(lit)

    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        log.warning("last clause not terminated by 0; accepting it")
        clauses.append(current)
    if len(clauses) != num_clauses:
        log.warning("header declares %d clauses, found %d", num_clauses, len(clauses))
    if any(not c for c in clauses):
        log.warning("formula contains the empty clause and is unsatisfiable")

    if shown is None:
        projection = frozenset(range(1, num_vars + 1))
    else:
        bad = sorted(v for v in shown if not 1 <= v <= num_vars)
        if bad:
            raise DimacsError(f"projection variables {bad} out of range 1..{num_vars}")
        projection = frozenset(shown)
    return PmcInstance(Formula.from_lists(clauses, num_vars), projection)


def read_dimacs(path) -> PmcInstance:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def serialize_dimacs(instance: PmcInstance) -> str:
    formula = instance.formula
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lits = sorted(clause, key=lambda l: (abs(l), l))
        lines.append(" ".join(map(str, lits + [0])))
    lines.append(" ".join(["c p show", *map(str, sorted(instance.projection)), "0"]))
    return "\n".join(lines) + "\n"

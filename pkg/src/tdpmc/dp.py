"""Post-order driver running a table algorithm at every nice-TD node."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

from .cnf import Formula, PmcInstance
from .decomposition import NiceTreeDecomposition

# rough per-row cost of a stored SAT row (mask, index entry, origin tuples)
SAT_ROW_BYTES = 200
DEFAULT_MEMORY_CAP = 2 * 1024 ** 3


class PassError(RuntimeError):
    """A table algorithm failed; ``node`` names the nice-TD node."""

    def __init__(self, node: int, cause: BaseException):
        super().__init__(f"table algorithm failed at node {node}: {cause}")
        self.node = node


class MemoryLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PassContext:
    node: int
    node_type: str
    variable: int | None  # introduced or removed variable
    bag: tuple[int, ...]
    clauses: tuple[frozenset[int], ...]
    projection: frozenset[int]  # P ∩ bag
    child_tables: tuple[Any, ...]
    prev: Sequence[Any] | None = None


def local_clauses(formula: Formula, bag) -> list[frozenset[int]]:
    """F_t: clauses whose variables all lie in ``bag``."""
    bag = set(bag)
    return [c for c in formula.clauses if all(abs(l) in bag for l in c)]


def _local_clause_map(formula: Formula, ntd: NiceTreeDecomposition) -> list[tuple]:
    by_var: dict[int, list[int]] = {}
    for i, c in enumerate(formula.clauses):
        for l in c:
            by_var.setdefault(abs(l), []).append(i)
    empties = [i for i, c in enumerate(formula.clauses) if not c]
    out = []
    for bag in ntd.bags:
        bag_set = set(bag)
        candidates = set(empties)
        for v in bag:
            candidates.update(by_var.get(v, ()))
        chosen = [i for i in sorted(candidates)
                  if all(abs(l) in bag_set for l in formula.clauses[i])]
        out.append(tuple(formula.clauses[i] for i in chosen))
    return out


def predicted_sat_bytes(ntd: NiceTreeDecomposition) -> int:
    return sum(2 ** len(bag) for bag in ntd.bags) * SAT_ROW_BYTES


def check_memory(ntd: NiceTreeDecomposition, cap: int | None = DEFAULT_MEMORY_CAP):
    predicted = predicted_sat_bytes(ntd)
    if cap is not None and predicted > cap:
        raise MemoryLimitExceeded(f"predicted SAT tables need {predicted} bytes, cap is {cap}")


def run_pass(instance: PmcInstance, ntd: NiceTreeDecomposition,
             algorithm: Callable[[PassContext], Any],
             prev: Sequence[Any] | None = None) -> list:
    """Evaluate ``algorithm`` bottom-up; returns the tables indexed by node id."""
    projection = instance.active_projection
    clause_map = _local_clause_map(instance.formula, ntd)
    tables: list = [None] * len(ntd)
    # node ids are post-order, so children are always complete
    for t in range(len(ntd)):
        ctx = PassContext(
            node=t,
            node_type=ntd.node_type[t],
            variable=ntd.variable[t],
            bag=ntd.bags[t],
            clauses=clause_map[t],
            projection=projection.intersection(ntd.bags[t]),
            child_tables=tuple(tables[c] for c in ntd.children[t]),
            prev=prev,
        )
        try:
            tables[t] = algorithm(ctx)
        except PassError:
            raise
        except Exception as exc:
            raise PassError(t, exc) from exc
    return tables

"""Exact projected model counting on tree decompositions of the primal graph."""

from .cnf import Formula, PmcInstance, is_model, parse_dimacs, read_dimacs, serialize_dimacs
from .decomposition import make_nice, read_td, write_td
from .oracle import brute_force
from .solver import count, projected_count

__all__ = [
    "Formula", "PmcInstance", "is_model", "parse_dimacs", "read_dimacs", "serialize_dimacs",
    "make_nice", "read_td", "write_td", "brute_force", "count", "projected_count",
]

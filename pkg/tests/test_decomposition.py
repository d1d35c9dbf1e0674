import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import A, B, FIXTURES, P1, P2, example1, random_3cnf
from tdpmc.cnf import Formula
from tdpmc.decomposition import (INTRODUCE, JOIN, LEAF, REMOVE, PrimalGraph, TdFormatError,
                                 TreeDecomposition, audit_nice, build_primal,
                                 elimination_ordering, heuristic_td, make_nice, read_td,
                                 read_td_file, td_from_ordering, validate_td, write_td)


def graph_of(edges, vertices=()):
    adj = {v: set() for v in vertices}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return PrimalGraph(frozenset(adj), {v: frozenset(ns) for v, ns in adj.items()})


def random_graph(rng, n, p):
    edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < p]
    return graph_of(edges, range(1, n + 1))


def test_primal_graph_of_running_example():
    g = build_primal(example1().formula)
    assert g.vertices == frozenset({A, B, P1, P2})
    assert g.edges == {frozenset(e) for e in [(A, B), (A, P1), (B, P1), (A, P2)]}


def test_primal_graph_ignores_undeclared_unused_variables():
    g = build_primal(Formula.from_lists([[1, -2]], 5))
    assert g.vertices == frozenset({1, 2})


def test_min_degree_eliminates_p2_first():
    order = elimination_ordering(build_primal(example1().formula), "min-degree")
    assert order[0] == P2
    assert sorted(order) == [A, B, P1, P2]


def test_unknown_heuristic():
    with pytest.raises(ValueError):
        elimination_ordering(graph_of([(1, 2)]), "max-degree")


def test_td_from_ordering_running_example():
    g = build_primal(example1().formula)
    td = td_from_ordering(g, [P2, P1, B, A])
    assert sorted(map(sorted, td.bags)) == sorted([sorted({P2, A}), sorted({P1, B, A})])
    assert td.width == 2
    assert validate_td(td, g).ok


def test_td_from_ordering_path():
    g = graph_of([(1, 2), (2, 3)])
    td = td_from_ordering(g, [1, 3, 2])
    assert td.width == 1
    assert validate_td(td, g).ok


def test_td_from_ordering_rejects_non_permutation():
    with pytest.raises(ValueError):
        td_from_ordering(graph_of([(1, 2)]), [1])


def test_make_nice_single_vertex():
    ntd = make_nice(TreeDecomposition((frozenset({7}),), ()))
    assert len(ntd) == 3
    assert ntd.node_type == (LEAF, INTRODUCE, REMOVE)
    assert ntd.width == 0
    assert not audit_nice(ntd)


def test_make_nice_empty_decomposition():
    ntd = make_nice(TreeDecomposition((frozenset(),), ()))
    assert ntd.node_type == (LEAF,)
    assert not audit_nice(ntd)


def test_make_nice_reproduces_tprime(tprime):
    ntd = make_nice(tprime)
    assert len(ntd) == 12
    assert ntd.node_type.count(JOIN) == 1
    assert ntd.node_type.count(LEAF) == 2
    assert ntd.children[10] == (5, 9)
    assert ntd.bags[10] == (A,)


def test_make_nice_of_three_bag_decomposition():
    td = read_td_file(FIXTURES / "example1_fig1.td")
    ntd = make_nice(td)
    assert not audit_nice(ntd)
    assert len(ntd) == 12
    assert ntd.width == td.width == 2
    assert sorted(ntd.node_type) == sorted([LEAF] * 2 + [INTRODUCE] * 5 + [REMOVE] * 4 + [JOIN])
    assert validate_td(ntd, build_primal(example1().formula)).ok


def test_make_nice_disconnected_components():
    # root with an empty bag and two unrelated subtrees
    td = TreeDecomposition((frozenset(), frozenset({1, 2}), frozenset({3})), ((0, 1), (0, 2)))
    ntd = make_nice(td)
    assert not audit_nice(ntd)
    assert validate_td(ntd, graph_of([(1, 2)], [3])).ok


def test_validate_reports_witnesses():
    g = graph_of([(1, 2), (2, 3)], [4])
    td = TreeDecomposition((frozenset({1, 2}), frozenset({3}), frozenset({1})), ((0, 1), (1, 2)))
    report = validate_td(td, g)
    assert report.uncovered_vertices == [4]
    assert report.uncovered_edges == [(2, 3)]
    assert report.disconnected == [1]
    assert not report.ok


def test_tree_decomposition_must_be_a_tree():
    with pytest.raises(ValueError):
        TreeDecomposition((frozenset({1}), frozenset({2}), frozenset({3})), ((0, 1),))
    with pytest.raises(ValueError):
        TreeDecomposition((frozenset({1}), frozenset({2}), frozenset({3})),
                          ((0, 1), (1, 2), (2, 0)))


def test_postorder_visits_children_first(tprime):
    order = tprime.postorder()
    pos = {n: i for i, n in enumerate(order)}
    assert order[-1] == tprime.root
    assert all(pos[c] < pos[n] for n in range(len(tprime)) for c in tprime.children[n])


def test_read_td_tprime(tprime):
    assert len(tprime) == 12
    assert tprime.width == 2
    assert tprime.bags[tprime.root] == frozenset()


def test_write_read_round_trip(tprime):
    back = read_td(write_td(tprime))
    assert back.bags == tprime.bags
    assert make_nice(back) == make_nice(tprime)


@pytest.mark.parametrize("text", [
    "",
    "b 1 1\n",
    "s td 1 1 1\ns td 1 1 1\nb 1 1\n",
    "s td 2 1 2\nb 1 1\nb 1 2\n1 2\n",
    "s td 1 1 2\nb 2 1\n",
    "s td 1 1 2\nb 1 3\n",
    "s td 2 1 2\nb 1 1\nb 2 2\n1 3\n",
    "s td 2 1 2\nb 1 1\nb 2 2\n",
    "s td 2 2 2\nb 1 1\nb 2 2\n1 2\n",
    "s td 1 1 1\nb 1 x\n",
    "s td 0 0 0\n",
])
def test_read_td_errors(text):
    with pytest.raises(TdFormatError):
        read_td(text)


def test_random_graphs_give_valid_nice_decompositions():
    rng = random.Random(5)
    for k in range(200):
        g = random_graph(rng, rng.randint(1, 14), rng.choice((0.15, 0.3, 0.5)))
        td = heuristic_td(g, ("min-fill", "min-degree")[k % 2], None if k % 3 else k)
        assert validate_td(td, g).ok
        ntd = make_nice(td)
        assert not audit_nice(ntd)
        assert ntd.width == td.width
        assert validate_td(ntd, g).ok


def test_heuristic_decomposition_is_deterministic():
    rng = random.Random(9)
    f = random_3cnf(rng, 12, 25)
    g = build_primal(f)
    for heuristic in ("min-fill", "min-degree"):
        assert make_nice(heuristic_td(g, heuristic)) == make_nice(heuristic_td(g, heuristic))
        assert heuristic_td(g, heuristic, 3) == heuristic_td(g, heuristic, 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9)), max_size=20), st.integers(0, 50))
def test_nice_form_preserves_validity(edges, seed):
    g = graph_of([(u, v) for u, v in edges if u != v], range(1, 4))
    td = heuristic_td(g, "min-fill", seed)
    ntd = make_nice(td)
    assert not audit_nice(ntd)
    assert validate_td(ntd, g).ok
    assert ntd.bags[ntd.root] == ()

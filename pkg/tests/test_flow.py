from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from minps.flow import Arc, CirculationNetwork, max_flow_value, solve_circulation


def hoffman_feasible(net):
    """Every node set must be able to export what it is forced to import."""
    nodes = net.nodes
    for r in range(len(nodes) + 1):
        for X in combinations(nodes, r):
            X = set(X)
            forced_in = sum(a.lower for a in net.arcs if a.head in X and a.tail not in X)
            room_out = sum(a.upper for a in net.arcs if a.tail in X and a.head not in X)
            if forced_in > room_out:
                return False
    return True


def test_simple_cycle():
    net = CirculationNetwork(("a", "b"), (Arc("a", "b", 1, 3), Arc("b", "a", 2, 2)))
    circ = solve_circulation(net)
    assert circ is not None and circ.is_valid()
    assert circ.flow == (2, 2)


def test_infeasible_cycle():
    net = CirculationNetwork(("a", "b"), (Arc("a", "b", 3, 4), Arc("b", "a", 0, 2)))
    assert solve_circulation(net) is None


def test_empty_and_zero_bounds():
    assert solve_circulation(CirculationNetwork(("a",), ())).flow == ()
    net = CirculationNetwork(("a", "b"), (Arc("a", "b", 0, 5),))
    assert solve_circulation(net).flow == (0,)


def test_arc_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        Arc("a", "b", 2, 1)


def test_fractional_bounds_are_exact():
    net = CirculationNetwork(("a", "b", "c"), (
        Arc("a", "b", F(1, 3), F(2, 3)), Arc("b", "c", F(1, 2), 1), Arc("c", "a", 0, F(7, 12))))
    circ = solve_circulation(net)
    assert circ.is_valid()
    assert all(isinstance(x, (int, F)) for x in circ.flow)
    assert F(1, 2) <= circ.flow[0] <= F(7, 12)


def test_max_flow_value():
    arcs = [("s", "a", 3), ("s", "b", 2), ("a", "b", 1), ("a", "t", 2), ("b", "t", 3)]
    assert max_flow_value(("s", "a", "b", "t"), arcs, "s", "t") == 5
    assert max_flow_value(("s", "t"), [("s", "t", F(1, 3))], "s", "t") == F(1, 3)


arc_strategy = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))


@settings(max_examples=300, deadline=None)
@given(st.lists(arc_strategy, min_size=1, max_size=8))
def test_matches_hoffman_condition(raw):
    nodes = (0, 1, 2, 3)
    arcs = tuple(Arc(u, v, min(a, b), max(a, b)) for u, v, a, b in raw if u != v)
    net = CirculationNetwork(nodes, arcs)
    circ = solve_circulation(net)
    assert (circ is not None) == hoffman_feasible(net)
    if circ is not None:
        assert circ.is_valid()
        # integer bounds give an integer circulation
        assert all(isinstance(x, int) or x.denominator == 1 for x in circ.flow)


@settings(max_examples=100, deadline=None)
@given(st.lists(arc_strategy, min_size=1, max_size=8), st.integers(1, 6))
def test_scaled_fractional_matches_hoffman(raw, q):
    nodes = (0, 1, 2, 3)
    arcs = tuple(Arc(u, v, F(min(a, b), q), F(max(a, b), q)) for u, v, a, b in raw if u != v)
    net = CirculationNetwork(nodes, arcs)
    circ = solve_circulation(net)
    assert (circ is not None) == hoffman_feasible(net)
    if circ is not None:
        assert circ.is_valid()
